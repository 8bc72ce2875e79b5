// the fixture response is rounded to six decimals
#![allow(clippy::approx_constant)]

mod common;

use common::{fixture, gaussian_matrix, gaussian_vec, rng};
use polysel_core::geometry::{
    build_event_polyhedron, complement, line_section, make_contrast, truncation_union,
    unboundedness_probe, EventGeometry, Polyhedron, DEFAULT_CAP,
};
use polysel_core::lasso::{fit_default, LassoFit, LassoProblem};
use polysel_core::linalg::{dot, Matrix, Qr};
use rand::Rng;

fn all_signs(k: usize) -> Vec<Vec<i8>> {
    (0..1u32 << k)
        .map(|mask| (0..k).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

fn all_models(p: usize) -> Vec<Vec<usize>> {
    (1..1u32 << p)
        .map(|mask| (0..p).filter(|&j| mask >> j & 1 == 1).collect())
        .collect()
}

fn lasso(x: &Matrix, y: &[f64], lambda: f64) -> LassoFit {
    fit_default(&LassoProblem::new(x, y, lambda).unwrap()).unwrap()
}

#[test]
fn fixture_regions_match_brute_force_fits() {
    let x = fixture();
    let lam = 2.0;
    let events: Vec<(Vec<usize>, Vec<i8>, Polyhedron)> = all_models(2)
        .into_iter()
        .flat_map(|m| {
            all_signs(m.len()).into_iter().map(move |s| (m.clone(), s))
        })
        .map(|(m, s)| {
            let poly = build_event_polyhedron(&x, lam, &m, &s).unwrap();
            (m, s, poly)
        })
        .collect();
    let mut checked = 0;
    for i in 0..=240 {
        for j in 0..=240 {
            let y = [-12.0 + 0.1 * i as f64 + 0.003, -12.0 + 0.1 * j as f64 + 0.007];
            let f = lasso(&x, &y, lam);
            if f.boundary_flag {
                continue;
            }
            let hits: Vec<_> = events.iter().filter(|(_, _, p)| p.contains(&y)).collect();
            if f.model.is_empty() {
                assert!(hits.is_empty(), "y={y:?}");
            } else {
                assert_eq!(hits.len(), 1, "y={y:?}");
                assert_eq!((&hits[0].0, &hits[0].1), (&f.model, &f.signs), "y={y:?}");
            }
            // closed form of the (+,+) region
            let pp = f.model == [0, 1] && f.signs == [1, 1];
            assert_eq!(pp, y[0] > 4.0 && y[0] + y[1] > 6.0, "y={y:?}");
            checked += 1;
        }
    }
    assert!(checked > 57_000);
}

#[test]
fn fixture_truncation_set_is_unbounded_on_both_sides() {
    // brute force along the line z + c w: the full model is selected exactly on T_m(z)
    let x = fixture();
    let c = make_contrast(&x, &[0, 1], &[1.0, 0.0], 1.0).unwrap();
    for t in [-5.0, -1.414214, 0.0, 1.414214, 3.0, 8.0] {
        let z = [0.0, t];
        let set = truncation_union(&x, 2.0, &c, &z, DEFAULT_CAP).unwrap();
        assert!(!set.bounded_above() && !set.bounded_below(), "t={t} {set}");
        for i in 0..6000 {
            let w = -30.0 + 0.01 * i as f64 + 0.0013;
            let f = lasso(&x, &[w, t], 2.0);
            if f.boundary_flag {
                continue;
            }
            assert_eq!(f.model == [0, 1], set.contains(w), "t={t} w={w} {set}");
        }
        let probe = unboundedness_probe(&x, 2.0, &c, &z).unwrap();
        assert!(probe.above && probe.below);
    }
    let set = truncation_union(&x, 2.0, &c, &[0.0, 1.414214], DEFAULT_CAP).unwrap();
    assert!((set.pieces()[0].1 + 7.414214).abs() < 1e-12);
    assert!((set.pieces()[1].0 - 4.585786).abs() < 1e-12);
}

#[test]
fn contrast_identities_and_inactive_rows() {
    let mut r = rng(11);
    for trial in 0..200 {
        let (n, p) = (25, if trial % 2 == 0 { 5 } else { 40 });
        let x = gaussian_matrix(&mut r, n, p);
        let k = 1 + trial % 5;
        let mut model: Vec<usize> = (0..p).collect();
        for i in 0..p {
            let j = r.random_range(i..p);
            model.swap(i, j);
        }
        let mut model = model[..k].to_vec();
        model.sort();
        let gamma = gaussian_vec(&mut r, k, 1.0);
        let c = make_contrast(&x, &model, &gamma, 1.0).unwrap();
        let xm = x.select_columns(&model);
        let back = xm.tr_mul_vec(c.eta());
        let scale = gamma.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        for (b, g) in back.iter().zip(&gamma) {
            assert!((b - g).abs() <= 1e-10 * scale);
        }
        assert!((dot(c.c(), c.eta()) - 1.0).abs() < 1e-12);
        let signs: Vec<i8> = (0..k).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect();
        let poly = build_event_polyhedron(&x, 1.5, &model, &signs).unwrap();
        let ni = complement(&model, p).len();
        assert_eq!(poly.n_constraints(), 2 * ni + k);
        let ac = poly.a().mul_vec(c.c());
        for (i, v) in ac.iter().take(2 * ni).enumerate() {
            assert!(v.abs() < 1e-10, "row {i}: {v}");
        }
    }
}

#[test]
fn fast_sections_match_explicit_polyhedra() {
    let mut r = rng(12);
    for trial in 0..300 {
        let (n, p) = (25, if trial % 2 == 0 { 5 } else { 40 });
        let x = gaussian_matrix(&mut r, n, p);
        let y = gaussian_vec(&mut r, n, 3.0);
        let lam = [0.5, 2.0, 5.0][trial % 3];
        let f = lasso(&x, &y, lam);
        if f.model.is_empty() || f.boundary_flag || f.model.len() > 8 {
            continue;
        }
        let gamma: Vec<f64> = (0..f.model.len()).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        let c = make_contrast(&x, &f.model, &gamma, 1.0).unwrap();
        let (w, z) = c.split(&y);
        let mut geom = EventGeometry::new(&x, lam, &c, &z).unwrap();
        let mut enumerated = Vec::new();
        geom.for_each_section(DEFAULT_CAP, |s, sec| {
            enumerated.push((s.to_vec(), sec));
            std::ops::ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(enumerated.len(), 1 << f.model.len());
        for (s, fast) in &enumerated {
            let poly = build_event_polyhedron(&x, lam, &f.model, s).unwrap();
            let slow = line_section(&poly, &c, &z);
            assert_eq!(fast.is_nonempty(), slow.is_nonempty(), "trial {trial} s={s:?}");
            for (a, b) in [(fast.v_minus, slow.v_minus), (fast.v_plus, slow.v_plus), (fast.v_zero, slow.v_zero)] {
                if a.is_finite() || b.is_finite() {
                    assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "trial {trial} {fast:?} {slow:?}");
                }
            }
        }
        // the realized section contains w
        let own = geom.section(&f.signs).unwrap();
        assert!(own.v_minus < w && w < own.v_plus && own.v_zero > 0.0);
    }
}

/// Design with orthonormal columns, which makes `(X_m'X_m)⁻¹γ` sparse.
fn orthogonal_design(r: &mut rand_chacha::ChaCha8Rng, n: usize, p: usize) -> Matrix {
    let g = gaussian_matrix(r, n, p);
    let qr = Qr::new(&g).unwrap();
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            qr.apply_q(&mut e);
            e.iter().map(|v| 3.0 * v).collect()
        })
        .collect();
    Matrix::from_columns(&cols).unwrap()
}

#[test]
fn probe_agrees_with_exhaustive_union() {
    let mut r = rng(13);
    let mut instances = 0;
    let mut bounded = 0;
    let mut with_zero_rows = 0;
    while instances < 500 {
        let orth = instances % 4 == 3;
        let (n, p) = if instances % 2 == 0 { (25, 5) } else { (25, 14) };
        let x = if orth { orthogonal_design(&mut r, n, p) } else { gaussian_matrix(&mut r, n, p) };
        let y = gaussian_vec(&mut r, n, 3.0);
        let lam = [0.3, 1.0, 3.0][r.random_range(0..3)];
        let f = lasso(&x, &y, lam);
        if f.model.is_empty() || f.boundary_flag || f.model.len() > 12 {
            continue;
        }
        let pos = r.random_range(0..f.model.len());
        let gamma: Vec<f64> = (0..f.model.len()).map(|i| if i == pos { 1.0 } else { 0.0 }).collect();
        let c = make_contrast(&x, &f.model, &gamma, 1.0).unwrap();
        let (_, z) = c.split(&y);
        let mut geom = EventGeometry::new(&x, lam, &c, &z).unwrap();
        let probe = geom.unboundedness_probe();
        let set = geom.truncation_union(DEFAULT_CAP).unwrap();
        assert_eq!(probe.above, !set.bounded_above(), "instance {instances}");
        assert_eq!(probe.below, !set.bounded_below(), "instance {instances}");
        let early = geom.union_unboundedness(DEFAULT_CAP).unwrap();
        assert_eq!(early, probe);
        if probe.bounded_somewhere() {
            bounded += 1;
        }
        if geom.zero_rows().count() > 0 {
            with_zero_rows += 1;
        }
        if f.model.len() == 1 {
            // two-ray form
            assert!(!probe.bounded_somewhere());
            assert!(set.len() <= 2);
        }
        instances += 1;
    }
    assert!(bounded > 0, "no bounded instance exercised");
    assert!(with_zero_rows > 0, "no parallel rows exercised");
}

#[test]
fn sections_never_unbounded_on_both_sides() {
    let mut r = rng(14);
    let mut fits = 0;
    while fits < 2000 {
        let (n, p) = (25, if fits % 2 == 0 { 5 } else { 40 });
        let x = gaussian_matrix(&mut r, n, p);
        let lam = [0.5, 2.0, 5.0][fits % 3];
        let y = gaussian_vec(&mut r, n, 3.0);
        let f = lasso(&x, &y, lam);
        fits += 1;
        if f.model.is_empty() || f.boundary_flag {
            continue;
        }
        let gamma: Vec<f64> = (0..f.model.len()).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        let c = make_contrast(&x, &f.model, &gamma, 1.0).unwrap();
        let poly = build_event_polyhedron(&x, lam, &f.model, &f.signs).unwrap();
        let (w, z0) = c.split(&y);
        let sec = line_section(&poly, &c, &z0);
        assert!(sec.v_minus < w && w < sec.v_plus);
        for probe in 0..5 {
            let z = if probe == 0 { z0.clone() } else { c.split(&gaussian_vec(&mut r, n, 5.0)).1 };
            let sec = line_section(&poly, &c, &z);
            assert!(sec.v_minus > f64::NEG_INFINITY || sec.v_plus < f64::INFINITY);
        }
    }
}

#[test]
fn polyhedra_partition_a_plane() {
    let mut r = rng(15);
    let x = gaussian_matrix(&mut r, 3, 3);
    let lam = 1.0;
    let events: Vec<(Vec<usize>, Vec<i8>, Polyhedron)> = all_models(3)
        .into_iter()
        .flat_map(|m| all_signs(m.len()).into_iter().map(move |s| (m.clone(), s)))
        .map(|(m, s)| {
            let poly = build_event_polyhedron(&x, lam, &m, &s).unwrap();
            (m, s, poly)
        })
        .collect();
    let (u, v) = (gaussian_vec(&mut r, 3, 1.0), gaussian_vec(&mut r, 3, 1.0));
    let mut flagged = 0;
    for i in 0..100 {
        for j in 0..100 {
            let (a, b) = (-6.0 + 0.12 * i as f64, -6.0 + 0.12 * j as f64);
            let y: Vec<f64> = (0..3).map(|k| a * u[k] + b * v[k] + 0.01).collect();
            let f = lasso(&x, &y, lam);
            if f.boundary_flag {
                flagged += 1;
                continue;
            }
            let hits: Vec<_> = events.iter().filter(|e| e.2.contains(&y)).collect();
            if f.model.is_empty() {
                assert!(hits.is_empty());
            } else {
                assert_eq!(hits.len(), 1, "y={y:?} fit {f:?}");
                assert_eq!((&hits[0].0, &hits[0].1), (&f.model, &f.signs));
            }
        }
    }
    assert!(flagged < 10);
}
