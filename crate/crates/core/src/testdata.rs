//! Shared fixtures for unit tests: the worked bundles that recur across the
//! module test suites.

use crate::bundle::{Filtration, TropicalToricBundle};
use crate::fan::Fan;
use crate::matroid::{mask_from, Mask, Matroid};
use crate::rational::{rat_int, Rat};
use crate::valuated::ValuatedMatroid;

pub fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn q(v: i64) -> Rat {
    rat_int(v)
}

pub fn p1_fan() -> Fan {
    Fan::new(
        1,
        vec![vec![1], vec![-1]],
        vec![vec![0], vec![1]],
        true,
        Some(vec![1, 1]),
    )
    .unwrap()
}

pub fn p2_fan() -> Fan {
    Fan::new(
        2,
        vec![vec![-1, -1], vec![1, 0], vec![0, 1]],
        vec![vec![0, 1], vec![0, 2], vec![1, 2]],
        true,
        Some(vec![1, 1, 1]),
    )
    .unwrap()
}

pub fn p3_fan() -> Fan {
    Fan::new(
        3,
        vec![
            vec![-1, -1, -1],
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
        ],
        vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        true,
        Some(vec![1, 1, 1, 1]),
    )
    .unwrap()
}

pub fn a1_fan() -> Fan {
    Fan::new(1, vec![vec![1]], vec![vec![0]], false, Some(vec![1])).unwrap()
}

pub fn a2_fan() -> Fan {
    Fan::new(
        2,
        vec![vec![1, 0], vec![0, 1]],
        vec![vec![0, 1]],
        false,
        Some(vec![1, 1]),
    )
    .unwrap()
}

pub fn a3_fan() -> Fan {
    Fan::new(
        3,
        vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        vec![vec![0, 1, 2]],
        false,
        Some(vec![1, 1, 1]),
    )
    .unwrap()
}

pub fn singular_surface_fan() -> Fan {
    Fan::new(
        2,
        vec![vec![1, 0], vec![1, 2], vec![-1, 1]],
        vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        true,
        Some(vec![1, 1, 1]),
    )
    .unwrap()
}

pub fn fano_fan() -> Fan {
    Fan::new(
        2,
        vec![
            vec![1, 0],
            vec![1, 1],
            vec![0, 1],
            vec![-1, 1],
            vec![-1, 0],
            vec![-1, -1],
            vec![0, -1],
        ],
        vec![
            vec![0, 1],
            vec![1, 2],
            vec![2, 3],
            vec![3, 4],
            vec![4, 5],
            vec![5, 6],
            vec![6, 0],
        ],
        true,
        Some(vec![1, 1, 1, 1, 1, 1, 1]),
    )
    .unwrap()
}

fn steps(list: &[(i64, Mask)]) -> Filtration {
    Filtration {
        steps: list.to_vec(),
    }
}

/// The tropical tangent bundle on projective n-space: trivially valuated
/// U(n, n+1) with atom steps at threshold 1.
pub fn tangent_pn(n: usize) -> TropicalToricBundle {
    let fan = match n {
        1 => p1_fan(),
        2 => p2_fan(),
        3 => p3_fan(),
        _ => panic!("only small projective spaces are wired up"),
    };
    let names: Vec<String> = (0..=n).map(|i| format!("w{i}")).collect();
    let m = Matroid::uniform(names, n).unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = (0..=n)
        .map(|i| steps(&[(1, 1 << i), (2, 0)]))
        .collect();
    TropicalToricBundle::new_sheaf(fan, vm, filtrations).unwrap()
}

/// The three tropicalizations of the plane bundle with filtration subspaces
/// span(e1,e2), span(e1+e3), span(e3).
pub fn m1_bundle() -> TropicalToricBundle {
    let m = Matroid::uniform(labels(&["e1+e2", "e2", "e1+e3", "e3"]), 3).unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![
        steps(&[(1, mask_from(&[0, 1])), (2, 0)]),
        steps(&[(1, mask_from(&[2])), (2, 0)]),
        steps(&[(1, mask_from(&[3])), (2, 0)]),
    ];
    TropicalToricBundle::new_sheaf(p2_fan(), vm, filtrations).unwrap()
}

pub fn m2_matroid() -> Matroid {
    Matroid::from_columns(
        labels(&["e1", "e2", "e1+e3", "e3"]),
        &[
            vec![q(1), q(0), q(0)],
            vec![q(0), q(1), q(0)],
            vec![q(1), q(0), q(1)],
            vec![q(0), q(0), q(1)],
        ],
    )
    .unwrap()
}

pub fn m2_bundle() -> TropicalToricBundle {
    let vm = ValuatedMatroid::trivial(&m2_matroid());
    let filtrations = vec![
        steps(&[(1, mask_from(&[0, 1])), (2, 0)]),
        steps(&[(1, mask_from(&[2])), (2, 0)]),
        steps(&[(1, mask_from(&[3])), (2, 0)]),
    ];
    TropicalToricBundle::new_sheaf(p2_fan(), vm, filtrations).unwrap()
}

pub fn m3_bundle() -> TropicalToricBundle {
    let m = Matroid::from_columns(
        labels(&["e1+e2", "e1-e2", "e2", "e1+e3", "e3", "e1+e2+e3"]),
        &[
            vec![q(1), q(1), q(0)],
            vec![q(1), q(-1), q(0)],
            vec![q(0), q(1), q(0)],
            vec![q(1), q(0), q(1)],
            vec![q(0), q(0), q(1)],
            vec![q(1), q(1), q(1)],
        ],
    )
    .unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![
        steps(&[(1, mask_from(&[0, 1, 2])), (2, 0)]),
        steps(&[(1, mask_from(&[3])), (2, 0)]),
        steps(&[(1, mask_from(&[4])), (2, 0)]),
    ];
    TropicalToricBundle::new_sheaf(p2_fan(), vm, filtrations).unwrap()
}

/// The rank-3 slope example: the M2 matroid with deeper filtrations.
pub fn hn_example_bundle() -> TropicalToricBundle {
    let vm = ValuatedMatroid::trivial(&m2_matroid());
    let filtrations = vec![
        steps(&[(2, mask_from(&[0, 1])), (3, 0)]),
        steps(&[(3, mask_from(&[2])), (4, 0)]),
        steps(&[(1, mask_from(&[3])), (2, 0)]),
    ];
    TropicalToricBundle::new_sheaf(p2_fan(), vm, filtrations).unwrap()
}

pub fn vamos_matroid() -> Matroid {
    let names: Vec<String> = (1..=8).map(|i| i.to_string()).collect();
    let non_bases = [
        vec![0usize, 1, 2, 3],
        vec![0, 3, 4, 5],
        vec![0, 3, 6, 7],
        vec![1, 2, 4, 5],
        vec![1, 2, 6, 7],
    ];
    let bad: Vec<Mask> = non_bases.iter().map(|v| mask_from(v)).collect();
    let bases = crate::matroid::k_subsets(8, 4)
        .into_iter()
        .filter(|b| !bad.contains(b))
        .collect();
    Matroid::from_bases(crate::matroid::Ground::new(names).unwrap(), bases).unwrap()
}

/// The Vamos bundle on the tropical affine plane.
pub fn vamos_bundle() -> TropicalToricBundle {
    let vm = ValuatedMatroid::trivial(&vamos_matroid());
    let filtrations = vec![
        steps(&[(1, mask_from(&[0, 1])), (2, 0)]),
        steps(&[(1, mask_from(&[2, 3])), (2, 0)]),
    ];
    TropicalToricBundle::new_sheaf(a2_fan(), vm, filtrations).unwrap()
}

/// The Vamos matroid as a trivial bundle over the tropical affine line.
pub fn vamos_a1_bundle() -> TropicalToricBundle {
    let vm = ValuatedMatroid::trivial(&vamos_matroid());
    TropicalToricBundle::new_sheaf(a1_fan(), vm, vec![steps(&[(1, 0)])]).unwrap()
}

pub fn fano_matroid() -> Matroid {
    let names: Vec<String> = (1..=7).map(|i| i.to_string()).collect();
    let lines = fano_lines();
    let bad: Vec<Mask> = lines.iter().map(|v| mask_from(v)).collect();
    let bases = crate::matroid::k_subsets(7, 3)
        .into_iter()
        .filter(|b| !bad.contains(b))
        .collect();
    Matroid::from_bases(crate::matroid::Ground::new(names).unwrap(), bases).unwrap()
}

pub fn fano_lines() -> Vec<Vec<usize>> {
    vec![
        vec![0, 1, 2],
        vec![1, 3, 5],
        vec![2, 3, 4],
        vec![0, 3, 6],
        vec![1, 4, 6],
        vec![0, 4, 5],
        vec![2, 5, 6],
    ]
}

/// The Fano bundle: line flats at threshold 1, points at 2 over the seven
/// rays of the smooth surface.
pub fn fano_bundle() -> TropicalToricBundle {
    let vm = ValuatedMatroid::trivial(&fano_matroid());
    let ray_lines = [
        vec![0usize, 1, 2],
        vec![1, 3, 5],
        vec![2, 3, 4],
        vec![0, 3, 6],
        vec![1, 4, 6],
        vec![0, 4, 5],
        vec![2, 5, 6],
    ];
    let filtrations = (0..7)
        .map(|i| {
            steps(&[
                (1, mask_from(&ray_lines[i])),
                (2, mask_from(&[i])),
                (3, 0),
            ])
        })
        .collect();
    TropicalToricBundle::new_sheaf(fano_fan(), vm, filtrations).unwrap()
}

/// The five-vector bundle on the tropical line (not tropically minimal).
pub fn five_vector_p1_bundle() -> TropicalToricBundle {
    let m = Matroid::from_columns(
        labels(&["w1", "w2", "w3", "w4", "w5"]),
        &[
            vec![q(1), q(0), q(0)],
            vec![q(1), q(1), q(0)],
            vec![q(0), q(1), q(0)],
            vec![q(0), q(0), q(1)],
            vec![q(0), q(1), q(1)],
        ],
    )
    .unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![
        steps(&[(1, mask_from(&[0, 1, 2])), (2, mask_from(&[0])), (3, 0)]),
        steps(&[(1, mask_from(&[2, 3, 4])), (2, mask_from(&[2])), (3, 0)]),
    ];
    TropicalToricBundle::new_sheaf(p1_fan(), vm, filtrations).unwrap()
}

/// The tropically minimal replacement of the five-vector bundle: the free
/// matroid on {w1, w3, w4} with the induced filtrations.
pub fn split_p1_bundle() -> TropicalToricBundle {
    let m = Matroid::uniform(labels(&["w1", "w3", "w4"]), 3).unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![
        steps(&[(1, mask_from(&[0, 1])), (2, mask_from(&[0])), (3, 0)]),
        steps(&[(1, mask_from(&[1, 2])), (2, mask_from(&[1])), (3, 0)]),
    ];
    TropicalToricBundle::new_sheaf(p1_fan(), vm, filtrations).unwrap()
}

/// The indecomposable, non-partially-modular bundle on the tropical line.
pub fn nonsplit_p1_bundle() -> TropicalToricBundle {
    let m = Matroid::from_columns(
        labels(&["w1", "w2", "w3", "w4"]),
        &[
            vec![q(1), q(0), q(0)],
            vec![q(0), q(1), q(0)],
            vec![q(0), q(0), q(1)],
            vec![q(1), q(1), q(1)],
        ],
    )
    .unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![
        steps(&[(1, mask_from(&[0, 1])), (2, 0)]),
        steps(&[(1, mask_from(&[2, 3])), (2, 0)]),
    ];
    TropicalToricBundle::new_sheaf(p1_fan(), vm, filtrations).unwrap()
}

/// The rank-2 reflexive sheaf on the singular surface that is not a vector
/// bundle (no integer weights).
pub fn singular_surface_sheaf() -> TropicalToricBundle {
    let m = Matroid::from_columns(
        labels(&["w1", "w2", "w3"]),
        &[vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]],
    )
    .unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![
        steps(&[(2, mask_from(&[0])), (3, 0)]),
        steps(&[(2, mask_from(&[1])), (3, 0)]),
        steps(&[(2, mask_from(&[2])), (3, 0)]),
    ];
    TropicalToricBundle::new_sheaf(singular_surface_fan(), vm, filtrations).unwrap()
}

/// The rank-2 reflexive sheaf on tropical affine 3-space that fails the
/// basis condition.
pub fn a3_sheaf() -> TropicalToricBundle {
    let m = Matroid::from_columns(
        labels(&["w1", "w2", "w3"]),
        &[vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]],
    )
    .unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![
        steps(&[(2, mask_from(&[0])), (3, 0)]),
        steps(&[(2, mask_from(&[1])), (3, 0)]),
        steps(&[(2, mask_from(&[2])), (3, 0)]),
    ];
    TropicalToricBundle::new_sheaf(a3_fan(), vm, filtrations).unwrap()
}

/// A rank-1 sheaf for a divisor vector on the given fan.
pub fn line_bundle(fan: Fan, a: &[i64]) -> TropicalToricBundle {
    let m = Matroid::from_label_bases(labels(&["w"]), vec![labels(&["w"])]).unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = a.iter().map(|&ai| steps(&[(ai + 1, 0)])).collect();
    TropicalToricBundle::new_sheaf(fan, vm, filtrations).unwrap()
}

/// The trivial bundle of the given valuated matroid over a fan.
pub fn trivial_bundle(fan: Fan, vm: ValuatedMatroid) -> TropicalToricBundle {
    let filtrations = (0..fan.ray_count()).map(|_| steps(&[(1, 0)])).collect();
    TropicalToricBundle::new_sheaf(fan, vm, filtrations).unwrap()
}

/// An equal-slope rank-2 direct sum on the line: two copies of the divisor
/// (a, b) glued along U(2,2).
pub fn equal_slope_sum_p1(a: i64, b: i64) -> TropicalToricBundle {
    let m = Matroid::uniform(labels(&["1", "2"]), 2).unwrap();
    let vm = ValuatedMatroid::trivial(&m);
    let filtrations = vec![steps(&[(a + 1, 0)]), steps(&[(b + 1, 0)])];
    TropicalToricBundle::new_sheaf(p1_fan(), vm, filtrations).unwrap()
}
