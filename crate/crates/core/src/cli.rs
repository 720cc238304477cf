//! Batch front end: parse JSON inputs, dispatch subcommands, and emit
//! deterministic JSON reports.
//!
//! Exit codes: 0 for success, 1 for a computed negative answer (not a
//! bundle, not semistable, not minimal, not isomorphic; the report carries
//! the finding), 2 for usage errors, 3 for missing files, 4 for parse or
//! configuration errors.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::bundle::{CertifyFailure, TropicalToricBundle};
use crate::io::{self, render, BundleDoc, EmbedInput, IoError, MatroidDoc};
use crate::lattice_embed::{bundle_lattices, dilworth_minimal_matroid, RankedLattice};
use crate::matroid::Mask;
use crate::rational::fmt_rat;
use crate::sections;
use crate::stability;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "tropbundle",
    about = "Exact computations with tropical toric vector bundles",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel table computations.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Cap on flat enumeration (also TROPBUNDLE_FLAT_CAP).
    #[arg(long, global = true)]
    pub flat_cap: Option<usize>,
    /// Cap on the subposet search of minimal-check.
    #[arg(long, global = true, default_value_t = 18)]
    pub minimal_cap: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a bundle file: sheaf axioms and fan geometry.
    Validate { input: PathBuf },
    /// Search a compatibility certificate per maximal cone.
    Certify { input: PathBuf },
    /// Global sections from the parliament of polytopes.
    H0 { input: PathBuf },
    /// First Chern vector and class.
    Chern { input: PathBuf },
    /// Chern data, degree, and slope against the polarization.
    Slope { input: PathBuf },
    /// Slope table over all proper flats with the stability verdict.
    Stability { input: PathBuf },
    /// Jordan-Hölder filtration of a semistable bundle.
    Jh { input: PathBuf },
    /// Harder-Narasimhan filtration.
    Hn { input: PathBuf },
    /// Fiber valuated matroid at a Cox point.
    Fiber {
        input: PathBuf,
        /// Cox coordinates, e.g. "0,inf,1".
        #[arg(long)]
        z: String,
    },
    /// Total-space equations and the intrinsic subcomplex.
    TotalSpace { input: PathBuf },
    /// Split into indecomposable summands.
    Decompose { input: PathBuf },
    /// Tensor by the line bundle of a divisor vector.
    Tensor {
        input: PathBuf,
        /// Divisor coefficients, e.g. "1,0,0".
        #[arg(long)]
        a: String,
    },
    /// Equivariant isomorphism test for two indecomposable bundles.
    Isomorphic { first: PathBuf, second: PathBuf },
    /// Embed a ranked lattice (or subspace data) into a minimal matroid.
    EmbedLattice { input: PathBuf },
    /// Cox presentation: twists, relations, bend pairs, gradings.
    Cox { input: PathBuf },
    /// Tropical minimality of the flat lattice against the filtrations.
    MinimalCheck { input: PathBuf },
}

pub struct Report {
    pub exit: i32,
    pub body: Value,
}

fn ok(body: Value) -> Report {
    Report {
        exit: EXIT_OK,
        body,
    }
}

fn negative(body: Value) -> Report {
    Report {
        exit: EXIT_NEGATIVE,
        body,
    }
}

fn read_file(path: &PathBuf) -> Result<String, Report> {
    fs::read_to_string(path).map_err(|e| Report {
        exit: if e.kind() == std::io::ErrorKind::NotFound {
            EXIT_NOT_FOUND
        } else {
            EXIT_PARSE
        },
        body: json!({"error": format!("cannot read {}: {e}", path.display())}),
    })
}

fn parse_error(e: impl std::fmt::Display) -> Report {
    Report {
        exit: EXIT_PARSE,
        body: json!({"error": e.to_string()}),
    }
}

fn load_bundle(path: &PathBuf) -> Result<TropicalToricBundle, Report> {
    let text = read_file(path)?;
    let doc: BundleDoc = serde_json::from_str(&text).map_err(parse_error)?;
    match doc.to_bundle() {
        Ok(b) => Ok(b),
        // Structural failures of the sheaf axioms are a domain verdict, not
        // a parse error.
        Err(IoError::Bundle(e)) => Err(negative(json!({
            "valid": false,
            "finding": e.to_string(),
        }))),
        Err(e) => Err(parse_error(e)),
    }
}

fn labels_of(e: &TropicalToricBundle, f: Mask) -> Value {
    Value::Array(
        e.vm.ground()
            .labels_of(f)
            .into_iter()
            .map(Value::String)
            .collect(),
    )
}

fn trop(v: &crate::tropical::TropicalVector) -> Value {
    io::trop_vector_json(v)
}

pub fn execute(cli: &Cli) -> Report {
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    if let Some(cap) = cli.flat_cap {
        std::env::set_var("TROPBUNDLE_FLAT_CAP", cap.to_string());
    }
    match run(cli) {
        Ok(report) | Err(report) => report,
    }
}

fn run(cli: &Cli) -> Result<Report, Report> {
    match &cli.command {
        Command::Validate { input } => {
            let e = load_bundle(input)?;
            let rep = e.fan.validate();
            Ok(ok(json!({
                "valid": true,
                "rank": e.rank(),
                "ground": e.vm.ground().labels(),
                "fan": {
                    "smooth": rep.smooth,
                    "simplicial": rep.simplicial,
                    "warnings": rep.warnings,
                },
            })))
        }
        Command::Certify { input } => {
            let e = load_bundle(input)?;
            match e.certify().map_err(parse_error)? {
                Ok(cert) => {
                    let cones: Vec<Value> = cert
                        .cones
                        .iter()
                        .map(|c| {
                            let weights: Vec<Value> = crate::matroid::mask_members(c.basis)
                                .iter()
                                .zip(&c.weights)
                                .map(|(&w, u)| {
                                    json!({
                                        "element": e.vm.ground().label(w),
                                        "u": u,
                                    })
                                })
                                .collect();
                            json!({
                                "cone": c.cone,
                                "basis": e.vm.ground().labels_of(c.basis),
                                "weights": weights,
                            })
                        })
                        .collect();
                    Ok(ok(json!({"certified": true, "cones": cones})))
                }
                Err(CertifyFailure::NoBasisForCone { cone }) => Ok(negative(json!({
                    "certified": false,
                    "failure": {"kind": "no basis for cone", "cone": cone},
                }))),
                Err(CertifyFailure::NoIntegerWeights {
                    cone,
                    basis,
                    message,
                }) => Ok(negative(json!({
                    "certified": false,
                    "failure": {
                        "kind": "no integer weights",
                        "cone": cone,
                        "basis": labels_of(&e, basis),
                        "message": message,
                    },
                }))),
            }
        }
        Command::H0 { input } => {
            let e = load_bundle(input)?;
            let rep = sections::h0(&e).map_err(parse_error)?;
            let breakdown: Vec<Value> = rep
                .breakdown
                .iter()
                .map(|(u, k)| json!({"u": u, "h0": k}))
                .collect();
            Ok(ok(json!({"total": rep.total, "breakdown": breakdown})))
        }
        Command::Chern { input } => {
            let e = load_bundle(input)?;
            let (vector, class) = stability::chern(&e).map_err(parse_error)?;
            Ok(ok(json!({
                "vector": vector,
                "class": class.normal_form.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            })))
        }
        Command::Slope { input } => {
            let e = load_bundle(input)?;
            let rep = stability::slope_report(&e).map_err(parse_error)?;
            Ok(ok(json!({
                "chern": rep.chern_vector,
                "degree": fmt_rat(&rep.degree),
                "rank": rep.rank,
                "slope": fmt_rat(&rep.slope),
            })))
        }
        Command::Stability { input } => {
            let e = load_bundle(input)?;
            let rep = stability::stability(&e).map_err(parse_error)?;
            let table: Vec<Value> = rep
                .table
                .iter()
                .map(|(f, s)| json!({"flat": labels_of(&e, *f), "slope": fmt_rat(s)}))
                .collect();
            let body = json!({
                "slope": fmt_rat(&rep.slope),
                "stable": rep.stable,
                "semistable": rep.semistable,
                "witness": rep.witness.map(|f| labels_of(&e, f)),
                "table": table,
            });
            Ok(if rep.semistable { ok(body) } else { negative(body) })
        }
        Command::Jh { input } => {
            let e = load_bundle(input)?;
            match stability::jordan_holder(&e) {
                Ok(filt) => Ok(ok(filtration_json(&e, &filt))),
                Err(err @ stability::StabilityError::NotSemistable)
                | Err(err @ stability::StabilityError::FiltrationFlatsNotModular { .. }) => {
                    Ok(negative(json!({"finding": err.to_string()})))
                }
                Err(e) => Err(parse_error(e)),
            }
        }
        Command::Hn { input } => {
            let e = load_bundle(input)?;
            let filt = stability::harder_narasimhan(&e).map_err(parse_error)?;
            Ok(ok(filtration_json(&e, &filt)))
        }
        Command::Fiber { input, z } => {
            let e = load_bundle(input)?;
            let coords = io::parse_ext_rat_list(z).map_err(parse_error)?;
            let point = crate::fiber::CoxPoint::new(&e, coords).map_err(parse_error)?;
            let circuits: Vec<Value> = crate::fiber::fiber_circuits(&e, &point)
                .iter()
                .map(trop)
                .collect();
            let fm = crate::fiber::fiber_matroid(&e, &point).map_err(parse_error)?;
            let components: Vec<Value> = fm
                .underlying()
                .map_err(parse_error)?
                .connected_components()
                .into_iter()
                .map(|c| {
                    Value::Array(
                        fm.ground()
                            .labels_of(c)
                            .into_iter()
                            .map(Value::String)
                            .collect(),
                    )
                })
                .collect();
            Ok(ok(json!({
                "circuits": circuits,
                "matroid": serde_json::to_value(MatroidDoc::from_valuated(&fm)).unwrap(),
                "components": components,
            })))
        }
        Command::TotalSpace { input } => {
            let e = load_bundle(input)?;
            let sys = crate::fiber::total_space_system(&e).map_err(parse_error)?;
            let polys: Vec<Value> = sys
                .iter()
                .map(|p| {
                    let terms: Vec<Value> = p
                        .terms
                        .iter()
                        .map(|(w, c, u)| {
                            json!({
                                "y": e.vm.ground().label(*w),
                                "coeff": c.to_string(),
                                "z_exp": u,
                            })
                        })
                        .collect();
                    json!({"terms": terms, "degree_class": p.degree_class})
                })
                .collect();
            let intrinsic = match crate::fiber::intrinsic_subcomplex(&e) {
                Ok(ic) => json!({
                    "lineality": ic.lineality,
                    "cones": ic.cones.iter().map(|c| json!({"rays": c.rays})).collect::<Vec<_>>(),
                }),
                Err(crate::fiber::FiberError::NontrivialValuation) => Value::Null,
                Err(e) => return Err(parse_error(e)),
            };
            Ok(ok(json!({
                "system": polys,
                "intrinsic_subcomplex": intrinsic,
            })))
        }
        Command::Decompose { input } => {
            let e = load_bundle(input)?;
            let parts = e.decompose().map_err(parse_error)?;
            let summands: Vec<Value> = parts
                .iter()
                .map(|p| serde_json::to_value(BundleDoc::from_bundle(p)).unwrap())
                .collect();
            Ok(ok(json!({
                "indecomposable": parts.len() == 1,
                "summands": summands,
            })))
        }
        Command::Tensor { input, a } => {
            let e = load_bundle(input)?;
            let a = io::parse_int_list(a).map_err(parse_error)?;
            let twisted = e.tensor_line(&a).map_err(parse_error)?;
            Ok(ok(serde_json::to_value(BundleDoc::from_bundle(&twisted)).unwrap()))
        }
        Command::Isomorphic { first, second } => {
            let e1 = load_bundle(first)?;
            let e2 = load_bundle(second)?;
            match e1.isomorphic(&e2) {
                Ok(Some((perm, u))) => {
                    let bijection: Vec<Value> = perm
                        .iter()
                        .enumerate()
                        .map(|(i, &j)| {
                            json!({
                                "from": e1.vm.ground().label(i),
                                "to": e2.vm.ground().label(j),
                            })
                        })
                        .collect();
                    Ok(ok(json!({
                        "isomorphic": true,
                        "bijection": bijection,
                        "character": u,
                    })))
                }
                Ok(None) => Ok(negative(json!({"isomorphic": false}))),
                Err(e) => Err(parse_error(e)),
            }
        }
        Command::EmbedLattice { input } => {
            let text = read_file(input)?;
            let parsed: EmbedInput = serde_json::from_str(&text).map_err(parse_error)?;
            let (lattice, lprime): (RankedLattice, Option<RankedLattice>) = match parsed {
                EmbedInput::Lattice(doc) => (doc.to_lattice().map_err(parse_error)?, None),
                EmbedInput::Subspaces(doc) => {
                    let subs = doc
                        .subspaces
                        .iter()
                        .map(|ray| {
                            ray.iter()
                                .map(|step| {
                                    step.iter()
                                        .map(|row| {
                                            row.iter()
                                                .map(|s| {
                                                    crate::rational::parse_rat(s)
                                                        .map_err(IoError::Schema)
                                                })
                                                .collect::<Result<Vec<_>, _>>()
                                        })
                                        .collect::<Result<Vec<_>, _>>()
                                })
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(parse_error)?;
                    let (lp, l) = bundle_lattices(doc.ambient, &subs).map_err(parse_error)?;
                    (l, Some(lp))
                }
            };
            let report = lattice.validate();
            if !report.pass() {
                return Ok(negative(json!({
                    "valid": false,
                    "violations": report.violations,
                })));
            }
            let emb = dilworth_minimal_matroid(&lattice).map_err(parse_error)?;
            let bases: Vec<Vec<String>> = emb
                .target
                .bases()
                .iter()
                .map(|&b| emb.target.ground().labels_of(b))
                .collect();
            let phi: Vec<Value> = lattice
                .elements
                .iter()
                .zip(&emb.phi)
                .map(|(e, &f)| {
                    json!({
                        "element": e,
                        "flat": emb.target.ground().labels_of(f),
                    })
                })
                .collect();
            Ok(ok(json!({
                "valid": true,
                "lattice_elements": lattice.elements,
                "lattice_ranks": lattice.rank,
                "intersection_lattice": lprime.map(|l| json!({
                    "elements": l.elements,
                    "ranks": l.rank,
                })),
                "matroid": {
                    "ground": emb.target.ground().labels(),
                    "rank": emb.target.rank_total(),
                    "bases": bases,
                },
                "phi": phi,
            })))
        }
        Command::Cox { input } => {
            let e = load_bundle(input)?;
            let p = e.cox_presentation().map_err(parse_error)?;
            let twists: Vec<Value> = e
                .vm
                .ground()
                .labels()
                .iter()
                .zip(&p.twists)
                .map(|(l, d)| json!({"element": l, "d": d}))
                .collect();
            let generators: Vec<Value> = p
                .generators
                .iter()
                .map(|g| {
                    let term_json = |terms: &[(usize, crate::tropical::ExtRat, Vec<i64>)]| {
                        terms
                            .iter()
                            .map(|(w, c, u)| {
                                json!({
                                    "e": e.vm.ground().label(*w),
                                    "coeff": c.to_string(),
                                    "x_exp": u,
                                })
                            })
                            .collect::<Vec<_>>()
                    };
                    let bend: Vec<Value> = (0..g.terms.len())
                        .map(|k| {
                            let reduced: Vec<_> = g
                                .terms
                                .iter()
                                .enumerate()
                                .filter(|&(i, _)| i != k)
                                .map(|(_, t)| t.clone())
                                .collect();
                            json!({
                                "deleted": e.vm.ground().label(g.terms[k].0),
                                "terms": term_json(&reduced),
                            })
                        })
                        .collect();
                    json!({
                        "terms": term_json(&g.terms),
                        "degree": g.degree,
                        "degree_class": g.degree_class,
                        "bend_pairs": bend,
                    })
                })
                .collect();
            Ok(ok(json!({"twists": twists, "generators": generators})))
        }
        Command::MinimalCheck { input } => {
            let e = load_bundle(input)?;
            match e.is_tropically_minimal(cli.minimal_cap) {
                Ok((true, _)) => Ok(ok(json!({"minimal": true}))),
                Ok((false, witness)) => Ok(negative(json!({
                    "minimal": false,
                    "witness": witness
                        .unwrap()
                        .into_iter()
                        .map(|f| labels_of(&e, f))
                        .collect::<Vec<_>>(),
                }))),
                Err(e) => Err(parse_error(e)),
            }
        }
    }
}

fn filtration_json(e: &TropicalToricBundle, filt: &stability::FlatFiltration) -> Value {
    let mut chain = vec![Value::Array(vec![])];
    chain.extend(filt.steps.iter().map(|s| labels_of(e, s.flat)));
    let steps: Vec<Value> = filt
        .steps
        .iter()
        .map(|s| {
            json!({
                "flat": labels_of(e, s.flat),
                "rank": s.rank,
                "gr_slope": fmt_rat(&s.gr_slope),
                "modular": s.flat_modular,
            })
        })
        .collect();
    json!({
        "filtration": chain,
        "slopes": filt.steps.iter().map(|s| fmt_rat(&s.gr_slope)).collect::<Vec<_>>(),
        "steps": steps,
        "warnings": filt.warnings,
        "unique": filt.unique,
    })
}

/// Run the CLI against the process arguments and return the exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap renders help/version on stdout with exit 0.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let report = execute(&cli);
    let text = render(&report.body);
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return EXIT_PARSE;
            }
        }
        None => print!("{text}"),
    }
    report.exit
}
