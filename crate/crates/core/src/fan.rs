//! Rational fans: smoothness and simpliciality tests, the class group via
//! Smith normal form, divisor classes, and integer solving over cones.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{smith_normal_form, unimodular_inverse, IMat, QMat, Smith};
use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("fan has no rays or no maximal cones")]
    EmptyFan,
    #[error("ray {0} is not primitive")]
    NonPrimitiveRay(usize),
    #[error("ray {0} out of range")]
    RayOutOfRange(usize),
    #[error("ray {0} belongs to no maximal cone")]
    OrphanRay(usize),
    #[error("cone {0:?} is not pointed")]
    NotPointed(Vec<usize>),
    #[error("rays do not span the ambient space")]
    RaysDoNotSpan,
    #[error("vector length {0} does not match ray count {1}")]
    LengthMismatch(usize, usize),
    #[error("fan carries no polarization vector")]
    MissingPolarization,
    #[error("search region is unbounded; clamp the intervals")]
    UnboundedSearch,
}

/// A rational fan: primitive integer rays and maximal cones given as ray
/// index sets.  Completeness is a user assertion; the polarization h is the
/// vector of intersection numbers fixed by the caller.
#[derive(Debug)]
pub struct Fan {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    pub complete: bool,
    pub polarization: Option<Vec<i64>>,
    class_group: OnceLock<ClassGroup>,
}

impl Clone for Fan {
    fn clone(&self) -> Self {
        Fan {
            dim: self.dim,
            rays: self.rays.clone(),
            max_cones: self.max_cones.clone(),
            complete: self.complete,
            polarization: self.polarization.clone(),
            class_group: OnceLock::new(),
        }
    }
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.rays == other.rays
            && self.max_cones == other.max_cones
            && self.complete == other.complete
            && self.polarization == other.polarization
    }
}
impl Eq for Fan {}

#[derive(Clone, Debug, Default)]
pub struct FanReport {
    pub smooth: bool,
    pub simplicial: bool,
    pub warnings: Vec<String>,
}

/// The class group `ℤ^s / im(φ)` with `φ(u)_i = u · v_i`, presented by the
/// Smith form of the ray matrix.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    smith: Smith,
    u_inv: IMat,
    s: usize,
}

impl ClassGroup {
    /// Invariant factors larger than one (the torsion part).
    pub fn torsion(&self) -> Vec<BigInt> {
        (0..self.smith.rank)
            .map(|i| self.smith.d.at(i, i).clone())
            .filter(|d| !d.is_one())
            .collect()
    }

    pub fn free_rank(&self) -> usize {
        self.s - self.smith.rank
    }

    /// Canonical coset representative: transport to the Smith basis, reduce
    /// the components along invariant factors, and transport back.
    pub fn normal_form(&self, a: &[BigInt]) -> Vec<BigInt> {
        let c = self.smith.u.mul_vec(a);
        let reduced: Vec<BigInt> = c
            .iter()
            .enumerate()
            .map(|(i, x)| {
                if i < self.smith.rank {
                    x.mod_floor(self.smith.d.at(i, i))
                } else {
                    x.clone()
                }
            })
            .collect();
        self.u_inv.mul_vec(&reduced)
    }
}

/// A divisor class on the fan: an integer vector together with its canonical
/// coset representative modulo `im(φ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorClass {
    pub representative: Vec<i64>,
    pub normal_form: Vec<BigInt>,
}

/// Outcome of an integer solve over a cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solution(Vec<i64>),
    /// No integer solution; the flag distinguishes rational infeasibility
    /// (with a short explanation) from a purely integral obstruction.
    Infeasible { rational_certificate: Option<String> },
}

impl Fan {
    pub fn new(
        dim: usize,
        rays: Vec<Vec<i64>>,
        max_cones: Vec<Vec<usize>>,
        complete: bool,
        polarization: Option<Vec<i64>>,
    ) -> Result<Self, FanError> {
        if rays.is_empty() || max_cones.is_empty() {
            return Err(FanError::EmptyFan);
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(FanError::RayOutOfRange(i));
            }
            let g = r.iter().fold(0i64, |acc, &x| acc.gcd(&x));
            if g != 1 {
                return Err(FanError::NonPrimitiveRay(i));
            }
        }
        let mut seen = vec![false; rays.len()];
        for cone in &max_cones {
            for &i in cone {
                if i >= rays.len() {
                    return Err(FanError::RayOutOfRange(i));
                }
                seen[i] = true;
            }
        }
        if let Some(orphan) = seen.iter().position(|&s| !s) {
            return Err(FanError::OrphanRay(orphan));
        }
        if let Some(h) = &polarization {
            if h.len() != rays.len() {
                return Err(FanError::LengthMismatch(h.len(), rays.len()));
            }
        }
        let fan = Fan {
            dim,
            rays,
            max_cones,
            complete,
            polarization,
            class_group: OnceLock::new(),
        };
        for cone in &fan.max_cones {
            if !fan.cone_is_pointed(cone) {
                return Err(FanError::NotPointed(cone.clone()));
            }
        }
        Ok(fan)
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    /// Positively independent: no nonzero nonnegative combination of the
    /// cone's rays vanishes.  Any such combination has a minimal-support
    /// witness whose support carries a one-dimensional kernel.
    fn cone_is_pointed(&self, cone: &[usize]) -> bool {
        let k = cone.len();
        for sub in 1u32..(1 << k) {
            let idx: Vec<usize> = (0..k).filter(|&i| sub >> i & 1 == 1).map(|i| cone[i]).collect();
            let rows: Vec<Vec<Rat>> = (0..self.dim)
                .map(|coord| {
                    idx.iter()
                        .map(|&r| Rat::from_integer(self.rays[r][coord].into()))
                        .collect()
                })
                .collect();
            let m = QMat::from_rows(rows);
            let ker = m.kernel();
            if ker.len() == 1 {
                let v = &ker[0];
                let one_sided = v.iter().all(|x| !x.is_negative())
                    || v.iter().all(|x| !x.is_positive());
                if one_sided && v.iter().any(|x| !x.is_zero()) {
                    return false;
                }
            }
        }
        true
    }

    /// Simpliciality, smoothness, and a heuristic completeness warning.
    /// Completeness itself is never verified.
    pub fn validate(&self) -> FanReport {
        let mut warnings = Vec::new();
        let mut simplicial = true;
        let mut smooth = true;
        for cone in &self.max_cones {
            let rows: Vec<Vec<Rat>> = cone
                .iter()
                .map(|&r| {
                    self.rays[r]
                        .iter()
                        .map(|&x| Rat::from_integer(x.into()))
                        .collect()
                })
                .collect();
            let rk = QMat::from_rows(rows).rank();
            if rk != cone.len() {
                simplicial = false;
                smooth = false;
                continue;
            }
            // Smooth: the rays extend to a ℤ-basis, i.e. all invariant
            // factors of the ray matrix are 1.
            let im = IMat::from_rows_i64(
                &cone
                    .iter()
                    .map(|&r| self.rays[r].clone())
                    .collect::<Vec<_>>(),
            );
            let s = smith_normal_form(&im);
            if (0..s.rank).any(|i| !s.d.at(i, i).is_one()) || s.rank != cone.len() {
                smooth = false;
            }
        }
        if self.complete {
            // In a complete fan every ridge ((n−1)-subset of a maximal
            // cone's rays) is shared by two maximal cones.
            let mut ridges: std::collections::BTreeMap<Vec<usize>, usize> =
                std::collections::BTreeMap::new();
            for cone in &self.max_cones {
                if cone.len() < self.dim.max(1) {
                    continue;
                }
                for skip in 0..cone.len() {
                    let mut ridge: Vec<usize> = cone
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &r)| r)
                        .collect();
                    ridge.sort_unstable();
                    *ridges.entry(ridge).or_insert(0) += 1;
                }
            }
            for (ridge, count) in ridges {
                if count == 1 && !ridge.is_empty() {
                    warnings.push(format!(
                        "fan flagged complete but ridge {ridge:?} lies in a single maximal cone"
                    ));
                }
            }
        }
        FanReport {
            smooth,
            simplicial,
            warnings,
        }
    }

    pub fn class_group(&self) -> Result<&ClassGroup, FanError> {
        let rows: Vec<Vec<i64>> = self.rays.clone();
        let rank_q = QMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect())
                .collect(),
        )
        .rank();
        if rank_q != self.dim {
            return Err(FanError::RaysDoNotSpan);
        }
        Ok(self.class_group.get_or_init(|| {
            let v = IMat::from_rows_i64(&self.rays);
            let smith = smith_normal_form(&v);
            let u_inv = unimodular_inverse(&smith.u);
            ClassGroup {
                smith,
                u_inv,
                s: self.rays.len(),
            }
        }))
    }

    pub fn divisor_class(&self, a: &[i64]) -> Result<DivisorClass, FanError> {
        if a.len() != self.rays.len() {
            return Err(FanError::LengthMismatch(a.len(), self.rays.len()));
        }
        let cg = self.class_group()?;
        let big: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
        Ok(DivisorClass {
            representative: a.to_vec(),
            normal_form: cg.normal_form(&big),
        })
    }

    /// Degree of a rank-one divisor vector against the polarization.
    pub fn line_degree(&self, a: &[i64]) -> Result<Rat, FanError> {
        let h = self
            .polarization
            .as_ref()
            .ok_or(FanError::MissingPolarization)?;
        if a.len() != h.len() {
            return Err(FanError::LengthMismatch(a.len(), h.len()));
        }
        Ok(Rat::from_integer(
            a.iter().zip(h).map(|(&x, &y)| x * y).sum::<i64>().into(),
        ))
    }

    /// Find `u ∈ ℤ^n` with `u · v_i ∈ [lo_i, hi_i]` for the listed rays.
    /// Unbounded intervals must be clamped by the caller.  Among the
    /// admissible target vectors the canonical solution (free Smith
    /// coordinates zeroed) that is lex-least in `u` is returned.
    pub fn solve_on_cone(
        &self,
        rays: &[usize],
        targets: &[(Option<i64>, Option<i64>)],
    ) -> Result<SolveOutcome, FanError> {
        assert_eq!(rays.len(), targets.len());
        for &r in rays {
            if r >= self.rays.len() {
                return Err(FanError::RayOutOfRange(r));
            }
        }
        let k = rays.len();
        let n = self.dim;
        let a = IMat::from_rows_i64(
            &rays
                .iter()
                .map(|&r| self.rays[r].clone())
                .collect::<Vec<_>>(),
        );
        // A·u = U⁻¹·D·(W⁻¹·u), so a target vector t is reachable from ℤ^n
        // exactly when (U·t)_i is divisible by d_i below the rank and zero
        // at and above it; then u = W·y with y_i = (U·t)_i / d_i.
        let s = smith_normal_form(&a);
        let rho = s.rank;
        let mut lo = Vec::with_capacity(k);
        let mut hi = Vec::with_capacity(k);
        for &(l, h) in targets {
            match (l, h) {
                (Some(l), Some(h)) if l <= h => {
                    lo.push(l);
                    hi.push(h);
                }
                (Some(_), Some(_)) => {
                    return Ok(SolveOutcome::Infeasible {
                        rational_certificate: Some("an interval is empty".to_string()),
                    })
                }
                _ => return Err(FanError::UnboundedSearch),
            }
        }
        let total: i128 = (0..k).map(|i| (hi[i] - lo[i]) as i128 + 1).product();
        if total > 2_000_000 {
            return Err(FanError::UnboundedSearch);
        }
        let mut best: Option<Vec<i64>> = None;
        let mut t = lo.clone();
        let mut saw_rational_point = false;
        loop {
            let tb: Vec<BigInt> = t.iter().map(|&x| BigInt::from(x)).collect();
            let ut = s.u.mul_vec(&tb);
            let mut in_row_space = true;
            let mut divisible = true;
            let mut y = vec![BigInt::zero(); n];
            for (i, val) in ut.iter().enumerate() {
                if i < rho && i < n {
                    let d = s.d.at(i, i);
                    if (val % d).is_zero() {
                        y[i] = val / d;
                    } else {
                        divisible = false;
                    }
                } else if !val.is_zero() {
                    in_row_space = false;
                }
            }
            if in_row_space {
                saw_rational_point = true;
                if divisible {
                    let u_big = s.w.mul_vec(&y);
                    let u: Option<Vec<i64>> =
                        u_big.iter().map(|b| i64::try_from(b.clone()).ok()).collect();
                    if let Some(u) = u {
                        if best.as_ref().map_or(true, |b| u < *b) {
                            best = Some(u);
                        }
                    }
                }
            }
            // advance the odometer over the box
            let mut pos = k;
            let mut done = true;
            while pos > 0 {
                pos -= 1;
                if t[pos] < hi[pos] {
                    t[pos] += 1;
                    t[pos + 1..k].copy_from_slice(&lo[pos + 1..k]);
                    done = false;
                    break;
                }
            }
            if k == 0 || done {
                break;
            }
        }
        match best {
            Some(u) => Ok(SolveOutcome::Solution(u)),
            None => {
                let cert = if saw_rational_point {
                    // Reachable over ℚ at some scaling but not over ℤ.
                    None
                } else if rational_point_exists(&a, &lo, &hi) {
                    None
                } else {
                    Some("the interval system has no rational solution".to_string())
                };
                Ok(SolveOutcome::Infeasible {
                    rational_certificate: cert,
                })
            }
        }
    }
}

/// Fourier–Motzkin feasibility of `lo ≤ A u ≤ hi` over the rationals.
fn rational_point_exists(a: &IMat, lo: &[i64], hi: &[i64]) -> bool {
    // Inequalities as rows (c, b) meaning c·u ≤ b.
    let n = a.cols;
    let mut ineqs: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for i in 0..a.rows {
        let row: Vec<Rat> = (0..n)
            .map(|j| Rat::from_integer(a.at(i, j).clone()))
            .collect();
        let neg: Vec<Rat> = row.iter().map(|x| -x.clone()).collect();
        ineqs.push((row, Rat::from_integer(hi[i].into())));
        ineqs.push((neg, Rat::from_integer((-lo[i]).into())));
    }
    for var in 0..n {
        let mut lows = Vec::new(); // c·u' ≤ b with positive coeff on var
        let mut ups = Vec::new();
        let mut rest = Vec::new();
        for (c, b) in ineqs {
            let coeff = c[var].clone();
            if coeff.is_zero() {
                rest.push((c, b));
            } else if coeff.is_positive() {
                ups.push((c, b));
            } else {
                lows.push((c, b));
            }
        }
        for (cl, bl) in &lows {
            for (cu, bu) in &ups {
                // Eliminate var between cl (negative coeff) and cu.
                let fl = -cl[var].clone();
                let fu = cu[var].clone();
                let mut c = vec![Rat::zero(); n];
                for j in 0..n {
                    c[j] = cl[j].clone() * fu.clone() + cu[j].clone() * fl.clone();
                }
                let b = bl.clone() * fu.clone() + bu.clone() * fl.clone();
                rest.push((c, b));
            }
        }
        ineqs = rest;
    }
    ineqs.iter().all(|(_, b)| !b.is_negative())
}
