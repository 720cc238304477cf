//! First Chern data, degrees and slopes, subsheaf/quotient calculus over
//! flats, stability tables, the see-saw identity, and Jordan-Hölder and
//! Harder-Narasimhan filtrations.  All slope arithmetic is exact rational.

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::bundle::{BundleError, Filtration, TropicalToricBundle};
use crate::fan::{DivisorClass, FanError};
use crate::matroid::{lex_key, mask_members, Mask, MatroidError};
use crate::rational::Rat;
use crate::valuated::VmError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilityError {
    #[error("fan carries no polarization vector")]
    MissingPolarization,
    #[error("{0:?} is not a flat")]
    NotAFlat(Vec<String>),
    #[error("flats are not nested")]
    NotNested,
    #[error("bundle is not semistable")]
    NotSemistable,
    #[error("filtration flat at ray {ray}, threshold {j} is not modular")]
    FiltrationFlatsNotModular { ray: usize, j: i64 },
    #[error("(F, E^{ray}({j})) is not a modular pair")]
    NotModularPair { ray: usize, j: i64 },
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Valuated(#[from] VmError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// First Chern data: `c_i = Σ_j j·(rk E^i(j) − rk E^i(j+1))`, finite over
/// the breakpoints, with its class.
pub fn chern(e: &TropicalToricBundle) -> Result<(Vec<i64>, DivisorClass), StabilityError> {
    let under = e.vm.underlying()?;
    let full = e.vm.ground().full_mask();
    let mut c = Vec::with_capacity(e.fan.ray_count());
    for filt in &e.filtrations {
        let mut prev = full;
        let mut acc = 0i64;
        for &(j, f) in &filt.steps {
            acc += (j - 1) * (under.rank(prev) as i64 - under.rank(f) as i64);
            prev = f;
        }
        c.push(acc);
    }
    let class = e.fan.divisor_class(&c)?;
    Ok((c, class))
}

pub fn degree(e: &TropicalToricBundle) -> Result<Rat, StabilityError> {
    let h = e
        .fan
        .polarization
        .as_ref()
        .ok_or(StabilityError::MissingPolarization)?;
    let (c, _) = chern(e)?;
    Ok(Rat::from_integer(
        c.iter().zip(h).map(|(&x, &y)| x * y).sum::<i64>().into(),
    ))
}

pub fn slope(e: &TropicalToricBundle) -> Result<Rat, StabilityError> {
    Ok(degree(e)? / Rat::from_integer((e.rank() as i64).into()))
}

#[derive(Clone, Debug)]
pub struct SlopeReport {
    pub chern_vector: Vec<i64>,
    pub chern_class: DivisorClass,
    pub degree: Rat,
    pub rank: usize,
    pub slope: Rat,
}

pub fn slope_report(e: &TropicalToricBundle) -> Result<SlopeReport, StabilityError> {
    let (chern_vector, chern_class) = chern(e)?;
    let degree = degree(e)?;
    let rank = e.rank();
    let slope = degree.clone() / Rat::from_integer((rank as i64).into());
    Ok(SlopeReport {
        chern_vector,
        chern_class,
        degree,
        rank,
        slope,
    })
}

fn check_flat(e: &TropicalToricBundle, f: Mask) -> Result<(), StabilityError> {
    let under = e.vm.underlying()?;
    if !under.is_flat(f) {
        return Err(StabilityError::NotAFlat(e.vm.ground().labels_of(f)));
    }
    Ok(())
}

fn reindex(f: Mask, kept: &[usize]) -> Mask {
    kept.iter()
        .enumerate()
        .filter(|&(_, &orig)| f >> orig & 1 == 1)
        .fold(0, |acc, (new, _)| acc | 1 << new)
}

/// The reflexive subsheaf of a flat: restrict the valuated matroid to F and
/// meet every filtration step with F.
pub fn subsheaf(e: &TropicalToricBundle, f: Mask) -> Result<TropicalToricBundle, StabilityError> {
    check_flat(e, f)?;
    let full = e.vm.ground().full_mask();
    let vm = e.vm.minor(full & !f, 0)?;
    let kept = mask_members(f);
    let sub_full = vm.ground().full_mask();
    let filtrations = e
        .filtrations
        .iter()
        .map(|filt| {
            let steps = filt
                .steps
                .iter()
                .map(|&(j, g)| (j, reindex(g & f, &kept)))
                .collect();
            Filtration::normalized(steps, sub_full)
        })
        .collect();
    Ok(TropicalToricBundle::new_sheaf_with(
        e.fan.clone(),
        vm,
        filtrations,
        false,
    )?)
}

/// The quotient by a flat: contract the valuated matroid and push every
/// step to its join with F, read inside the interval above F.
pub fn quotient(e: &TropicalToricBundle, f: Mask) -> Result<TropicalToricBundle, StabilityError> {
    check_flat(e, f)?;
    let under = e.vm.underlying()?;
    let vm = e.vm.minor(0, f)?;
    let full = e.vm.ground().full_mask();
    let kept = mask_members(full & !f);
    let q_full = vm.ground().full_mask();
    let filtrations = e
        .filtrations
        .iter()
        .map(|filt| {
            let steps = filt
                .steps
                .iter()
                .map(|&(j, g)| {
                    let join = under.closure(g | f);
                    (j, reindex(join & !f, &kept))
                })
                .collect();
            Filtration::normalized(steps, q_full)
        })
        .collect();
    Ok(TropicalToricBundle::new_sheaf_with(
        e.fan.clone(),
        vm,
        filtrations,
        false,
    )?)
}

/// The subquotient for nested flats F ⊊ F′: restrict to F′ then contract F,
/// with steps `((E^i(j) ∧ F′) ∨ F) \ F`.
pub fn subquotient(
    e: &TropicalToricBundle,
    f: Mask,
    fprime: Mask,
) -> Result<TropicalToricBundle, StabilityError> {
    check_flat(e, f)?;
    check_flat(e, fprime)?;
    if f & fprime != f || f == fprime {
        return Err(StabilityError::NotNested);
    }
    quotient(&subsheaf(e, fprime)?, reindex(f, &mask_members(fprime)))
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub slope: Rat,
    pub stable: bool,
    pub semistable: bool,
    /// Lex-least slope-maximizing proper flat when stability fails.
    pub witness: Option<Mask>,
    /// Slope of the subsheaf of every proper nonempty flat.
    pub table: Vec<(Mask, Rat)>,
}

/// Exhaustive slope table over proper nonempty flats.
pub fn stability(e: &TropicalToricBundle) -> Result<StabilityReport, StabilityError> {
    let mu = slope(e)?;
    let under = e.vm.underlying()?;
    let full = e.vm.ground().full_mask();
    let proper: Vec<Mask> = under
        .flats()?
        .into_iter()
        .filter(|&f| f != 0 && f != full)
        .collect();
    let table: Vec<(Mask, Rat)> = proper
        .par_iter()
        .map(|&f| {
            let s = slope(&subsheaf(e, f).expect("flat subsheaf")).expect("slope");
            (f, s)
        })
        .collect();
    let stable = table.iter().all(|(_, s)| *s < mu);
    let semistable = table.iter().all(|(_, s)| *s <= mu);
    let witness = if stable {
        None
    } else {
        let max = table.iter().map(|(_, s)| s.clone()).max().unwrap();
        table
            .iter()
            .filter(|(_, s)| *s == max)
            .map(|&(f, _)| f)
            .min_by_key(|&f| lex_key(f))
    };
    Ok(StabilityReport {
        slope: mu,
        stable,
        semistable,
        witness,
        table,
    })
}

#[derive(Clone, Debug)]
pub struct SeeSawReport {
    pub degree_total: Rat,
    pub degree_sub: Rat,
    pub degree_quotient: Rat,
    pub slope_total: Rat,
    pub slope_mixture: Rat,
    pub holds: bool,
}

/// The see-saw identity `deg E = deg E_F + deg E/F`, asserted only after
/// every (F, E^i(j)) is verified to be a modular pair.
pub fn see_saw_check(e: &TropicalToricBundle, f: Mask) -> Result<SeeSawReport, StabilityError> {
    check_flat(e, f)?;
    let under = e.vm.underlying()?;
    for (ray, filt) in e.filtrations.iter().enumerate() {
        for &(j, g) in &filt.steps {
            let (ok, _) = under.is_modular(f, Some(g))?;
            if !ok {
                return Err(StabilityError::NotModularPair { ray, j });
            }
        }
    }
    let degree_total = degree(e)?;
    let sub = subsheaf(e, f)?;
    let degree_sub = degree(&sub)?;
    let (degree_quotient, quotient_rank) = if f == e.vm.ground().full_mask() {
        (Rat::zero(), 0usize)
    } else {
        let q = quotient(e, f)?;
        (degree(&q)?, q.rank())
    };
    let slope_total = slope(e)?;
    let r = Rat::from_integer((e.rank() as i64).into());
    let r1 = Rat::from_integer((sub.rank() as i64).into());
    let r2 = Rat::from_integer((quotient_rank as i64).into());
    let slope_mixture = if quotient_rank == 0 {
        degree_sub.clone() / r1.clone()
    } else {
        (r1.clone() / r.clone()) * (degree_sub.clone() / r1)
            + (r2.clone() / r) * (degree_quotient.clone() / r2)
    };
    let holds = degree_total == degree_sub.clone() + degree_quotient.clone()
        && slope_total == slope_mixture;
    Ok(SeeSawReport {
        degree_total,
        degree_sub,
        degree_quotient,
        slope_total,
        slope_mixture,
        holds,
    })
}

/// One step of a flat filtration with its graded piece data.
#[derive(Clone, Debug)]
pub struct FiltrationStep {
    /// Flat in the original ground set.
    pub flat: Mask,
    pub rank: usize,
    pub gr_slope: Rat,
    pub flat_modular: bool,
}

#[derive(Clone, Debug)]
pub struct FlatFiltration {
    pub steps: Vec<FiltrationStep>,
    pub warnings: Vec<String>,
    /// All filtration flats and all chosen steps modular, which is what
    /// guarantees uniqueness of the filtration.
    pub unique: bool,
}

fn filtration_flats_modular(e: &TropicalToricBundle) -> Result<Option<(usize, i64)>, StabilityError> {
    let under = e.vm.underlying()?;
    for (ray, filt) in e.filtrations.iter().enumerate() {
        for &(j, g) in &filt.steps {
            if !under.is_modular(g, None)?.0 {
                return Ok(Some((ray, j)));
            }
        }
    }
    Ok(None)
}

/// Map a flat of a quotient bundle back to the original ground set.
fn lift_flat(base: Mask, sub: Mask, e_quotient: &TropicalToricBundle, e: &TropicalToricBundle) -> Mask {
    let mut out = base;
    for pos in mask_members(sub) {
        let label = e_quotient.vm.ground().label(pos);
        let orig = e.vm.ground().position(label).unwrap();
        out |= 1 << orig;
    }
    out
}

/// Jordan-Hölder filtration of a semistable bundle with modular filtration
/// flats: greedy descent through lex-least minimal-rank stable flats of
/// slope μ.
pub fn jordan_holder(e: &TropicalToricBundle) -> Result<FlatFiltration, StabilityError> {
    if let Some((ray, j)) = filtration_flats_modular(e)? {
        return Err(StabilityError::FiltrationFlatsNotModular { ray, j });
    }
    let report = stability(e)?;
    if !report.semistable {
        return Err(StabilityError::NotSemistable);
    }
    let mu = report.slope.clone();
    let mut steps: Vec<FiltrationStep> = Vec::new();
    let mut current = e.clone();
    let mut base: Mask = 0;
    let under = e.vm.underlying()?;
    loop {
        let cur_under = current.vm.underlying()?;
        let cur_full = current.vm.ground().full_mask();
        let mut candidates: Vec<(usize, Mask)> = Vec::new();
        for f in cur_under.flats()? {
            if f == 0 || f == cur_full {
                continue;
            }
            let sub = subsheaf(&current, f)?;
            if slope(&sub)? == mu && stability(&sub)?.stable {
                candidates.push((cur_under.rank(f), f));
            }
        }
        let choice = candidates
            .into_iter()
            .min_by_key(|&(rk, f)| (rk, lex_key(f)));
        match choice {
            None => {
                // current itself is stable: close the filtration at 𝒢.
                let gr = current.clone();
                assert!(stability(&gr)?.stable, "terminal piece is stable");
                let flat = e.vm.ground().full_mask();
                steps.push(FiltrationStep {
                    flat,
                    rank: e.rank(),
                    gr_slope: slope(&gr)?,
                    flat_modular: true,
                });
                break;
            }
            Some((_, f)) => {
                let gr = subsheaf(&current, f)?;
                let gr_slope = slope(&gr)?;
                assert_eq!(gr_slope, mu, "graded slope stays at mu");
                assert!(stability(&gr)?.stable, "graded piece is stable");
                let lifted = lift_flat(base, f, &current, e);
                let modular = under.is_modular(lifted, None)?.0;
                steps.push(FiltrationStep {
                    flat: lifted,
                    rank: under.rank(lifted),
                    gr_slope,
                    flat_modular: modular,
                });
                current = quotient(&current, f)?;
                base = lifted;
            }
        }
    }
    Ok(FlatFiltration {
        steps,
        warnings: Vec::new(),
        unique: true,
    })
}

/// Harder-Narasimhan filtration: repeatedly take the flat of maximal slope
/// and maximal rank among the maximizers (lex-least on ties, with a
/// warning).  Modularity of the filtration flats and of the chosen steps is
/// reported, not enforced; the output is flagged unique when it all holds.
pub fn harder_narasimhan(e: &TropicalToricBundle) -> Result<FlatFiltration, StabilityError> {
    if e.fan.polarization.is_none() {
        return Err(StabilityError::MissingPolarization);
    }
    let mut warnings = Vec::new();
    let mut unique = true;
    if let Some((ray, j)) = filtration_flats_modular(e)? {
        unique = false;
        warnings.push(format!(
            "filtration flat at ray {ray}, threshold {j} is not modular; \
             uniqueness of the filtration is not guaranteed"
        ));
    }
    let under = e.vm.underlying()?;
    let mut steps: Vec<FiltrationStep> = Vec::new();
    let mut current = e.clone();
    let mut base: Mask = 0;
    let mut prev_slope: Option<Rat> = None;
    loop {
        let cur_under = current.vm.underlying()?;
        let cur_full = current.vm.ground().full_mask();
        let mut best: Option<(Rat, usize)> = None;
        let mut table: Vec<(Mask, usize, Rat)> = Vec::new();
        for f in cur_under.flats()? {
            if f == 0 {
                continue;
            }
            let sub = subsheaf(&current, f)?;
            let s = slope(&sub)?;
            let rk = cur_under.rank(f);
            match &best {
                None => best = Some((s.clone(), rk)),
                Some((bs, brk)) => {
                    if s > *bs || (s == *bs && rk > *brk) {
                        best = Some((s.clone(), rk));
                    }
                }
            }
            table.push((f, rk, s));
        }
        let (best_slope, best_rank) = best.expect("at least the full flat");
        let mut maximizers: Vec<Mask> = table
            .iter()
            .filter(|(_, rk, s)| *s == best_slope && *rk == best_rank)
            .map(|&(f, _, _)| f)
            .collect();
        maximizers.sort_by_key(|&f| lex_key(f));
        if maximizers.len() > 1 {
            unique = false;
            warnings.push(format!(
                "{} flats tie at maximal slope and rank; picking the lex-least",
                maximizers.len()
            ));
        }
        let f = maximizers[0];
        let gr = subsheaf(&current, f)?;
        let gr_slope = slope(&gr)?;
        assert!(
            stability(&gr)?.semistable,
            "maximal destabilizer is semistable"
        );
        if let Some(p) = &prev_slope {
            assert!(gr_slope < *p, "slopes strictly decrease");
        }
        prev_slope = Some(gr_slope.clone());
        let lifted = lift_flat(base, f, &current, e);
        let modular = under.is_modular(lifted, None)?.0;
        if !modular {
            unique = false;
        }
        steps.push(FiltrationStep {
            flat: lifted,
            rank: under.rank(lifted),
            gr_slope,
            flat_modular: modular,
        });
        if f == cur_full {
            break;
        }
        current = quotient(&current, f)?;
        base = lifted;
    }
    Ok(FlatFiltration {
        steps,
        warnings,
        unique,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::mask_from;
    use crate::rational::rat_int;
    use crate::testdata as td;

    fn q(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn chern_vectors() {
        let (c, _) = chern(&td::tangent_pn(2)).unwrap();
        assert_eq!(c, vec![1, 1, 1]);
        let (c, _) = chern(&td::tangent_pn(3)).unwrap();
        assert_eq!(c, vec![1, 1, 1, 1]);

        let (c, _) = chern(&td::line_bundle(td::p2_fan(), &[3, -1, 2])).unwrap();
        assert_eq!(c, vec![3, -1, 2]);

        let t = td::trivial_bundle(
            td::p2_fan(),
            crate::valuated::ValuatedMatroid::trivial(
                &crate::matroid::Matroid::uniform(td::labels(&["1", "2", "3"]), 2).unwrap(),
            ),
        );
        assert_eq!(chern(&t).unwrap().0, vec![0, 0, 0]);
    }

    #[test]
    fn slopes() {
        assert_eq!(slope(&td::tangent_pn(2)).unwrap(), q(3, 2));
        assert_eq!(slope(&td::tangent_pn(3)).unwrap(), q(4, 3));
        assert_eq!(slope(&td::m1_bundle()).unwrap(), q(4, 3));
        assert_eq!(slope(&td::m2_bundle()).unwrap(), q(4, 3));
        assert_eq!(slope(&td::hn_example_bundle()).unwrap(), q(13, 3));
        assert_eq!(slope(&td::vamos_bundle()).unwrap(), rat_int(1));
    }

    #[test]
    fn vamos_sub_and_quotient_slopes() {
        let e = td::vamos_bundle();
        let f = mask_from(&[0, 1, 2, 3]);
        let sub = subsheaf(&e, f).unwrap();
        assert_eq!(slope(&sub).unwrap(), q(4, 3));
        let quot = quotient(&e, f).unwrap();
        assert_eq!(slope(&quot).unwrap(), rat_int(0));
        assert_eq!(quot.rank(), 1);
    }

    #[test]
    fn quotient_composition() {
        // (E/F1)/F2 = E/F2 for nested flats.
        let e = td::hn_example_bundle();
        let f1 = mask_from(&[3]); // {e3}
        let f2 = mask_from(&[0, 2, 3]); // {e1, e1+e3, e3}
        let q1 = quotient(&e, f1).unwrap();
        let f2_in_q1 = mask_from(&[0, 2]); // e1, e1+e3 inside the quotient
        let two = quotient(&q1, f2_in_q1).unwrap();
        let one = quotient(&e, f2).unwrap();
        assert_eq!(two.vm, one.vm);
        assert_eq!(two.filtrations, one.filtrations);

        // subsheaf at the full flat is the bundle itself.
        let full = e.vm.ground().full_mask();
        let s = subsheaf(&e, full).unwrap();
        assert_eq!(s.vm, e.vm);
        assert_eq!(s.filtrations, e.filtrations);
    }

    #[test]
    fn stability_reports() {
        // Tangent bundles are stable with all proper slopes 1.
        for n in [2usize, 3] {
            let rep = stability(&td::tangent_pn(n)).unwrap();
            assert!(rep.stable && rep.semistable);
            assert!(rep.table.iter().all(|(_, s)| *s == rat_int(1)));
        }

        // The uniform-matroid tropicalization is stable, the realizable one
        // is destabilized by {e1, e1+e3, e3} with slope 3/2.
        let rep = stability(&td::m1_bundle()).unwrap();
        assert!(rep.stable);
        assert!(rep.table.iter().all(|(_, s)| *s == rat_int(1)));

        let rep = stability(&td::m2_bundle()).unwrap();
        assert!(!rep.semistable);
        let witness = rep.witness.unwrap();
        assert_eq!(witness, mask_from(&[0, 2, 3]));
        let (_, s) = rep
            .table
            .iter()
            .find(|(f, _)| *f == witness)
            .unwrap();
        assert_eq!(*s, q(3, 2));

        // Vamos: not semistable, witness {1,2,3,4}.
        let rep = stability(&td::vamos_bundle()).unwrap();
        assert!(!rep.semistable);
        assert_eq!(rep.witness.unwrap(), mask_from(&[0, 1, 2, 3]));

        // Rank-1: vacuously stable.
        let rep = stability(&td::line_bundle(td::p2_fan(), &[1, 0, 0])).unwrap();
        assert!(rep.stable && rep.table.is_empty());
    }

    #[test]
    fn see_saw() {
        // Atoms are modular, so the identity always holds there.
        for e in [td::m1_bundle(), td::m2_bundle(), td::tangent_pn(2)] {
            let rep = see_saw_check(&e, 1).unwrap();
            assert!(rep.holds);
        }

        // The Vamos flat {1,2,3,4} forms modular pairs with the steps.
        let e = td::vamos_bundle();
        let rep = see_saw_check(&e, mask_from(&[0, 1, 2, 3])).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.degree_total, rat_int(4));
        assert_eq!(rep.degree_sub, rat_int(4));
        assert_eq!(rep.degree_quotient, rat_int(0));

        // Degenerate equality at the full flat.
        let rep = see_saw_check(&e, e.vm.ground().full_mask()).unwrap();
        assert!(rep.holds);
    }

    #[test]
    fn jordan_holder_filtrations() {
        // Stable bundle: single step at 𝒢.
        let jh = jordan_holder(&td::tangent_pn(2)).unwrap();
        assert_eq!(jh.steps.len(), 1);
        assert_eq!(jh.steps[0].flat, td::tangent_pn(2).vm.ground().full_mask());

        // Equal-slope rank-2 sum on the line: {1} then {1,2}.
        let e = td::equal_slope_sum_p1(1, 2);
        let jh = jordan_holder(&e).unwrap();
        let flats: Vec<Mask> = jh.steps.iter().map(|s| s.flat).collect();
        assert_eq!(flats, vec![mask_from(&[0]), mask_from(&[0, 1])]);
        for s in &jh.steps {
            assert_eq!(s.gr_slope, slope(&e).unwrap());
        }

        // Three equal-slope line bundles: a 3-step chain.
        let m = crate::matroid::Matroid::uniform(td::labels(&["1", "2", "3"]), 3).unwrap();
        let vm = crate::valuated::ValuatedMatroid::trivial(&m);
        let e3 = TropicalToricBundle::new_sheaf(
            td::p1_fan(),
            vm,
            vec![
                Filtration { steps: vec![(2, 0)] },
                Filtration { steps: vec![(3, 0)] },
            ],
        )
        .unwrap();
        let jh = jordan_holder(&e3).unwrap();
        assert_eq!(jh.steps.len(), 3);
        let flats: Vec<Mask> = jh.steps.iter().map(|s| s.flat).collect();
        assert_eq!(
            flats,
            vec![mask_from(&[0]), mask_from(&[0, 1]), mask_from(&[0, 1, 2])]
        );

        // Non-semistable input is refused.
        assert!(matches!(
            jordan_holder(&td::m2_bundle()),
            Err(StabilityError::NotSemistable)
        ));
    }

    #[test]
    fn harder_narasimhan_filtrations() {
        // The rank-3 example: {e1, e1+e3, e3} then 𝒢, slopes 9/2 > 4.
        let e = td::hn_example_bundle();
        let hn = harder_narasimhan(&e).unwrap();
        let flats: Vec<Mask> = hn.steps.iter().map(|s| s.flat).collect();
        assert_eq!(flats, vec![mask_from(&[0, 2, 3]), e.vm.ground().full_mask()]);
        assert_eq!(hn.steps[0].gr_slope, q(9, 2));
        assert_eq!(hn.steps[1].gr_slope, rat_int(4));

        // Vamos: {1,2,3,4} then 𝒢 with slopes 4/3 > 0; the step flat is not
        // modular, so uniqueness is not flagged.
        let e = td::vamos_bundle();
        let hn = harder_narasimhan(&e).unwrap();
        let flats: Vec<Mask> = hn.steps.iter().map(|s| s.flat).collect();
        assert_eq!(flats, vec![mask_from(&[0, 1, 2, 3]), e.vm.ground().full_mask()]);
        assert_eq!(hn.steps[0].gr_slope, q(4, 3));
        assert_eq!(hn.steps[1].gr_slope, rat_int(0));
        assert!(!hn.unique);
        assert!(!hn.steps[0].flat_modular);

        // Semistable input: a single step.
        let hn = harder_narasimhan(&td::tangent_pn(2)).unwrap();
        assert_eq!(hn.steps.len(), 1);
        assert!(hn.unique);
    }

    #[test]
    fn hn_restricted_to_graded_pieces_is_single_step() {
        let e = td::hn_example_bundle();
        let hn = harder_narasimhan(&e).unwrap();
        let mut prev: Mask = 0;
        for step in &hn.steps {
            let gr = if prev == 0 {
                subsheaf(&e, step.flat).unwrap()
            } else {
                subquotient(&e, prev, step.flat).unwrap()
            };
            let inner = harder_narasimhan(&gr).unwrap();
            assert_eq!(inner.steps.len(), 1);
            prev = step.flat;
        }
    }

    #[test]
    fn tropicalization_preserves_stability_direction() {
        // Classical slope table of the plane tangent bundle from subspace
        // dimensions: every proper subspace has slope at most 1, so the
        // classical bundle is stable and the tropicalization must be too.
        use crate::linalg::Subspace;
        let rays = [[-1i64, -1], [1, 0], [0, 1]];
        let ray_vec = |i: usize| -> Vec<Rat> {
            rays[i]
                .iter()
                .map(|&x| Rat::from_integer(x.into()))
                .collect()
        };
        let mut classical_stable = true;
        for subset in 1u32..7 {
            let gens: Vec<Vec<Rat>> = (0..3)
                .filter(|&i| subset >> i & 1 == 1)
                .map(ray_vec)
                .collect();
            let f = Subspace::span(2, &gens);
            if f.dim() == 0 || f.dim() == 2 {
                continue;
            }
            // Degree of the induced subfiltration: one unit per ray whose
            // line lies inside F.
            let deg: i64 = (0..3)
                .filter(|&i| f.contains(&Subspace::span(2, &[ray_vec(i)])))
                .count() as i64;
            let slope_f = Rat::from_integer(deg.into())
                / Rat::from_integer((f.dim() as i64).into());
            if slope_f >= q(3, 2) {
                classical_stable = false;
            }
        }
        assert!(classical_stable);
        assert!(stability(&td::tangent_pn(2)).unwrap().stable);
    }

    #[test]
    fn stable_implies_indecomposable() {
        for e in [td::tangent_pn(2), td::tangent_pn(3), td::m1_bundle()] {
            if stability(&e).unwrap().stable {
                assert!(e.is_indecomposable().unwrap());
            }
        }
    }

    #[test]
    fn slope_shifts_under_line_twists() {
        for e in [
            td::tangent_pn(2),
            td::m1_bundle(),
            td::m2_bundle(),
            td::vamos_bundle(),
        ] {
            let a: Vec<i64> = (0..e.fan.ray_count() as i64).map(|i| i - 1).collect();
            let l = td::line_bundle(e.fan.clone(), &a);
            let twisted = e.tensor_line(&a).unwrap();
            assert_eq!(
                slope(&twisted).unwrap(),
                slope(&e).unwrap() + slope(&l).unwrap()
            );
        }
    }
}
