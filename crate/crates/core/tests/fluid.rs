use kinfluid::fluid::*;
use kinfluid::spectral::*;

fn taylor_green(g: &TorusGrid, t: f64) -> SpectralVector {
    let a = (-2.0 * t).exp();
    SpectralVector::from_fn(g, |x, y| [a * x.sin() * y.cos(), -a * x.cos() * y.sin()])
}

#[test]
fn taylor_green_decays_exactly() {
    let g = TorusGrid::new(2, 64).unwrap();
    let mut s = FluidState::new(taylor_green(&g, 0.0), 1.0).unwrap();
    let dt = 1e-3;
    for _ in 0..1000 {
        s = ns_step(&s, FluidSource::None, dt).unwrap();
    }
    let e = s.v.sub(&taylor_green(&g, 1.0));
    let err = e.inner(&e).sqrt();
    assert!(err < 1e-6, "{err:e}");
}

fn turbulent_start(g: &TorusGrid) -> SpectralVector {
    let w = SpectralVector::from_fn(g, |x, y| {
        [0.8 * (2.0 * y).sin() + 0.3 * (x + y).cos(), 0.5 * (3.0 * x).cos() - 0.2 * (x - 2.0 * y).sin()]
    });
    leray_project(&w).unwrap()
}

#[test]
fn unforced_energy_decays_at_the_dissipation_rate() {
    let g = TorusGrid::new(2, 32).unwrap();
    let mut s = FluidState::new(turbulent_start(&g), 1.0).unwrap();
    let dt = 1e-3;
    for _ in 0..200 {
        let (e0, d0) = (s.kinetic_energy(), s.dissipation());
        s = ns_step(&s, FluidSource::None, dt).unwrap();
        let (e1, d1) = (s.kinetic_energy(), s.dissipation());
        assert!(e1 < e0);
        // dE/dt = -ν∫|∇v|²; the trapezoid error is dt²|D''|/12 ≈ 3e-5 D here
        assert!(((e1 - e0) / dt + 0.5 * (d0 + d1)).abs() < 1e-4 * d0);
    }
}

#[test]
fn drag_forced_flow_stays_solenoidal_for_a_thousand_steps() {
    let g = TorusGrid::new(2, 32).unwrap();
    let rho = SpectralScalar::from_fn(&g, |x, y| 1.0 + 0.3 * (x - y).cos());
    let momentum = SpectralVector::from_fn(&g, |x, y| [0.4 * y.sin() * (1.0 + 0.3 * (x - y).cos()), 0.2 * x.cos()]);
    let mut s = FluidState::new(turbulent_start(&g), 1.0).unwrap();
    for _ in 0..1000 {
        s = ns_step(&s, FluidSource::Drag { rho: &rho, momentum: &momentum }, 2e-3).unwrap();
    }
    assert!(divergence(&s.v).max_abs() < 1e-10);
}
