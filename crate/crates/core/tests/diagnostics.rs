use std::f64::consts::PI;

use kinfluid::diagnostics::*;
use kinfluid::epns::MacroState;
use kinfluid::kinetic::*;
use kinfluid::spectral::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gaussian_free_energy_matches_one_dimensional_quadrature() {
    let g = TorusGrid::new(2, 8).unwrap();
    let vb = VelocityBox::new(2, 32, 8.0).unwrap();
    let one = SpectralScalar::constant(&g, 1.0);
    let zero = SpectralVector::zeros(&g);
    let f = maxwellian(&one, &zero, 1.0, vb, 0.1).unwrap();
    let got = free_energy(&f, &zero).unwrap();

    // M = m(ξ₁)m(ξ₂) splits: ∫(|ξ|²/2 + log M)M = 2∫(ξ²/2 + log m)m
    let h = vb.spacing();
    let (mut mass, mut e) = (0.0, 0.0);
    for x in vb.nodes() {
        let m = (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        mass += m * h;
        e += (x * x / 2.0 + m.ln()) * m * h;
    }
    let quad = (2.0 * PI).powi(2) * 2.0 * e * mass;
    assert!((got - quad).abs() < 1e-10 * quad.abs(), "{got} vs {quad}");
    let closed = -(2.0 * PI).powi(2) * (2.0 * PI).ln();
    assert!((got - closed).abs() < 1e-9 * closed.abs(), "{got} vs {closed}");
}

#[test]
fn sampled_maxwellian_dissipates_nothing_and_drag_sees_its_heat() {
    let g = TorusGrid::new(2, 8).unwrap();
    let vb = VelocityBox::new(2, 32, 8.0).unwrap();
    let rho = SpectralScalar::from_fn(&g, |x, y| 1.0 + 0.2 * (x - y).sin());
    let u = SpectralVector::from_fn(&g, |x, _| [0.3 * x.cos(), -0.1]);
    let f = maxwellian(&rho, &u, 1.0, vb, 0.1).unwrap();
    assert!(dissipation_d1(&f, &u) < 1e-8);
    // drag against v = u leaves the thermal part d·σ·∫ρ
    let d2 = dissipation_d2(&f, &u) - kinfluid::fluid::gradient_sq(&u);
    assert!((d2 - 2.0 * rho.integral()).abs() < 1e-8 * d2);
}

fn random_measure(rng: &mut ChaCha8Rng, k: usize) -> DiscreteMeasure {
    let mut m = DiscreteMeasure::new();
    for _ in 0..k {
        m.push([rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)], rng.random_range(0.05..1.0));
    }
    m
}

#[test]
fn bounded_lipschitz_triangle_inequality_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let (a, b, c) = (random_measure(&mut rng, 3), random_measure(&mut rng, 3), random_measure(&mut rng, 3));
        let ab = bl_distance_lp(&a, &b, 2).unwrap();
        let bc = bl_distance_lp(&b, &c, 2).unwrap();
        let ac = bl_distance_lp(&a, &c, 2).unwrap();
        assert!(ac <= ab + bc + 1e-9, "{ac} > {ab} + {bc}");
        assert!((bl_distance_lp(&b, &a, 2).unwrap() - ab).abs() < 1e-9);
    }
}

#[test]
fn bounded_lipschitz_of_point_masses_is_the_capped_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let p = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
        let q = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
        let got = bl_distance_lp(&DiscreteMeasure::dirac(p), &DiscreteMeasure::dirac(q), 2).unwrap();
        assert!((got - torus_distance(p, q, 2).min(2.0)).abs() < 1e-9);
    }
    // unequal masses at one point: the test function saturates at 1
    let mut heavy = DiscreteMeasure::new();
    heavy.push([1.0, 1.0], 1.5);
    let got = bl_distance_lp(&heavy, &DiscreteMeasure::dirac([1.0, 1.0]), 2).unwrap();
    assert!((got - 0.5).abs() < 1e-9);
}

#[test]
fn bounded_lipschitz_is_dominated_by_the_negative_sobolev_distance() {
    let g = TorusGrid::new(2, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..100 {
        let node = |rng: &mut ChaCha8Rng| g.point(rng.random_range(0..g.len()));
        let (mut mu, mut nu) = (DiscreteMeasure::new(), DiscreteMeasure::new());
        let ws: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = ws.iter().sum();
        for w in &ws {
            mu.push(node(&mut rng), *w);
        }
        let vs: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
        let vt: f64 = vs.iter().sum();
        for w in &vs {
            nu.push(node(&mut rng), w * total / vt);
        }
        let bl = bl_distance_lp(&mu, &nu, 2).unwrap();
        let hm1 = h_minus1_distance(&mu, &nu, &g).unwrap();
        assert!(bl <= BL_SURROGATE_CONSTANT * hm1 + 1e-12, "{bl} vs {hm1}");
    }
}

fn random_state(g: &TorusGrid, vb: VelocityBox, rng: &mut ChaCha8Rng) -> DistributionFunction {
    let (a, s) = (rng.random_range(0.0..0.4), rng.random_range(0.5..1.5));
    let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let k = rng.random_range(1..3) as f64;
    DistributionFunction::from_fn(g, vb, 1.0, 0.1, |x, xi| {
        let p = g.point(x);
        let m = [c[0] + 0.3 * p[1].sin(), c[1] * p[0].cos()];
        let q = (xi[0] - m[0]).powi(2) + (xi[1] - m[1]).powi(2);
        (1.0 + a * (k * p[0] + p[1]).cos()) * (-q / (2.0 * s)).exp() / (2.0 * PI * s)
    })
    .unwrap()
}

#[test]
fn csiszar_kullback_holds_on_random_pairs() {
    let g = TorusGrid::new(2, 8).unwrap();
    let vb = VelocityBox::new(2, 32, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..30 {
        let f = random_state(&g, vb, &mut rng);
        let other = random_state(&g, vb, &mut rng);
        let mo = compute_moments(&other);
        let u = regularized_velocity(&mo, 1e-12).unwrap();
        let m = maxwellian(&mo.rho, &u, 1.0, vb, 0.1).unwrap();
        let r = rel_entropy_to_maxwellian(&f, &m).unwrap();
        assert!(r.value >= 0.0, "{r:?}");
        assert!(r.l1_sq <= 4.0 * f.mass().max(m.mass()) * r.value * (1.0 + 1e-9) + 1e-20);
    }
}

#[test]
fn modulated_energy_of_a_state_against_its_own_moments_vanishes() {
    let g = TorusGrid::new(2, 16).unwrap();
    let vb = VelocityBox::new(2, 32, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let f = random_state(&g, vb, &mut rng);
        let m = compute_moments(&f);
        let u = regularized_velocity(&m, 1e-12).unwrap();
        let v = leray_project(&SpectralVector::from_fn(&g, |x, y| [0.2 * y.sin(), 0.1 * (2.0 * x).cos()])).unwrap();
        for sigma in [1.0, 0.0] {
            let limit = MacroState::from_density(&m.rho, u.clone(), v.clone(), sigma).unwrap();
            let e = modulated_energy(&m, &v, &limit, 1e-12).unwrap();
            assert!(e.mod_energy + e.coulomb_mod <= 1e-9, "{e:?}");
        }
    }
}

#[test]
fn stress_defect_of_a_narrow_gaussian_is_its_heat() {
    let g = TorusGrid::new(2, 8).unwrap();
    let vb = VelocityBox::new(2, 32, 4.0).unwrap();
    let rho = SpectralScalar::from_fn(&g, |x, y| 1.0 + 0.3 * (x + y).cos());
    let u = SpectralVector::from_fn(&g, |x, _| [0.4 * x.sin(), 0.2]);
    for s2 in [0.25, 0.16] {
        let f = DistributionFunction::maxwellian(&rho, &u, vb, s2, 0.1).unwrap();
        let limit = MacroState::from_density(&rho, u.clone(), SpectralVector::zeros(&g), 0.0).unwrap();
        let got = stress_defect(&compute_moments(&f), &limit, 0.0);
        let want = 2.0 * s2 * rho.integral();
        assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
    }
}

#[test]
fn entropy_residual_charges_dissipation_against_the_energy_drop() {
    // F falls by exactly the dissipation integral: residual is zero
    let recs: Vec<DiagnosticsRecord> = (0..5)
        .map(|k| {
            let t = 0.1 * k as f64;
            DiagnosticsRecord { t, mass: 1.0, free_energy: 2.0 - 3.0 * t, d2: 3.0, ..Default::default() }
        })
        .collect();
    let r = entropy_inequality_residual(&recs, 0.5, 0.0, 2).unwrap();
    assert!(r.max.abs() < 1e-12, "{r:?}");
}
