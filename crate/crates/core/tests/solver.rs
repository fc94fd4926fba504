mod common;

use common::{example, linear_envelopes, local_spec};
use radcone::mesh::{Grid, MeshFunction};
use radcone::solver::{constant_state, multi_start, solve, Operator, Outcome, Region, SolveSettings, State};
use radcone::{pull_back_profile, BoxPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn undamped() -> SolveSettings {
    SolveSettings {
        damping: 1.0,
        ..SolveSettings::default()
    }
}

fn random_state(grid: &Grid, rng: &mut ChaCha8Rng, scale: f64) -> State {
    let mut one = || {
        let a: f64 = rng.gen_range(0.0..scale);
        let b: f64 = rng.gen_range(0.0..scale);
        MeshFunction::from_fn(grid, move |t| a + b * t * (1.0 - t), move |t| b * (1.0 - 2.0 * t))
    };
    [one(), one()]
}

#[test]
fn zero_forcing_maps_everything_to_zero() {
    let spec = local_spec("0", "0");
    let op = Operator::with_nodes(&spec, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_state(op.grid(), &mut rng, 3.0);
    let t = op.apply(&x).unwrap();
    for w in &t.state {
        assert!(w.values().iter().chain(w.derivs()).all(|&y| y == 0.0));
    }
    let r = solve(&op, &x, &undamped()).unwrap();
    assert!(r.converged && r.iterations <= 2);
    assert!(r.is_zero());
    let r = solve(&op, &x, &SolveSettings::default()).unwrap();
    assert!(r.converged && r.is_zero(), "damped run polishes onto the exact zero");
}

#[test]
fn constant_forcing_gives_the_closed_form() {
    let spec = local_spec("1", "0");
    let op = Operator::with_nodes(&spec, 256).unwrap();
    let t = op.apply(&constant_state(op.grid(), [0.0, 0.0])).unwrap();
    let u = &t.state[0];
    for ((&s, &y), &dy) in u.nodes().iter().zip(u.values()).zip(u.derivs()) {
        assert!((y - (s - s * s / 2.0)).abs() < 1e-12, "t = {s}");
        assert!((dy - (1.0 - s)).abs() < 1e-12);
    }
    assert!(t.state[1].sup_norm() == 0.0);

    let spec = local_spec("1", "1");
    let op = Operator::with_nodes(&spec, 256).unwrap();
    let r = solve(&op, &constant_state(op.grid(), [0.0, 0.0]), &undamped()).unwrap();
    assert!(r.converged);
    for w in &r.state {
        for (&s, &y) in w.nodes().iter().zip(w.values()) {
            assert!((y - (s - s * s / 2.0)).abs() < 1e-6);
        }
    }
}

#[test]
fn example_operator_matches_trapezoid_oracle() {
    let spec = example();
    let op = Operator::with_nodes(&spec, 256).unwrap();
    let t = op.apply(&constant_state(op.grid(), [1.0, 1.0])).unwrap();
    let u = &t.state[0];
    let j = u.nodes().iter().position(|&s| s == 0.5).unwrap();
    // f1 = (2 - sin(0)) · 1 = 2 for the constant state, g = 1.
    let bc = &spec.equation(0).bc;
    let n = 100_000;
    let h = 1.0 / n as f64;
    let trap: f64 = (0..=n)
        .map(|k| {
            let s = k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * bc.k(0.5, s) * 2.0
        })
        .sum::<f64>()
        * h;
    let oracle = bc.gamma(0.5) + bc.delta(0.5) + trap;
    assert!((u.values()[j] - oracle).abs() < 1e-9, "{} vs {oracle}", u.values()[j]);
}

#[test]
fn discrete_operator_satisfies_boundary_conditions() {
    let spec = example();
    let op = Operator::with_nodes(&spec, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_state(op.grid(), &mut rng, 0.8);
    let t = op.apply(&x).unwrap();
    for i in 0..2 {
        let eq = spec.equation(i);
        let w = &t.state[i];
        let n = w.len();
        let beta = eq.beta.apply_mesh(&x[i]);
        let lhs = eq.bc.c() * w.values()[n - 1] + eq.bc.d() * w.derivs()[n - 1];
        assert!((lhs - beta).abs() < 1e-13);
        assert!((t.at_zero[i] - eq.alpha.apply_mesh(&x[i])).abs() == 0.0);
    }
}

#[test]
fn derivative_channel_is_second_order() {
    let spec = example();
    let mut errs = Vec::new();
    for n in [128, 256, 512] {
        let grid = Grid::graded(n, 3.0, &[]).unwrap();
        let op = Operator::new(&spec, grid).unwrap();
        let x: State = [0, 1].map(|_| MeshFunction::from_fn(op.grid(), |t| 1.0 + t * (1.0 - t), |t| 1.0 - 2.0 * t));
        let t = op.apply(&x).unwrap();
        let w = &t.state[0];
        let (s, y, dy) = (w.nodes(), w.values(), w.derivs());
        let mut e: f64 = 0.0;
        for j in 1..s.len() - 1 {
            if s[j] < 0.05 || s[j] > 0.95 {
                continue;
            }
            let fd = (y[j + 1] - y[j - 1]) / (s[j + 1] - s[j - 1]);
            e = e.max((fd - dy[j]).abs());
        }
        errs.push(e);
    }
    let order = ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2()) / 2.0;
    assert!(order >= 1.8, "errors {errs:?}, order {order}");
}

#[test]
fn reported_residual_is_recomputable() {
    let spec = example();
    let op = Operator::with_nodes(&spec, 128).unwrap();
    let r = solve(&op, &constant_state(op.grid(), [0.1, 0.1]), &SolveSettings::default()).unwrap();
    let again = op.residual(&r.state).unwrap();
    assert!((r.residual - again).abs() <= 1e-12);
}

#[test]
fn example_from_small_data_converges_inside_the_cone() {
    let spec = example();
    let op = Operator::with_nodes(&spec, 1024).unwrap();
    let r = solve(&op, &constant_state(op.grid(), [0.1, 0.1]), &SolveSettings::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Converged);
    assert!(r.residual < 1e-8);
    assert!(r.cone_ok(), "{:?}", r.cone);
    for b in &r.boundary {
        assert!(b.at_zero < 1e-5 && b.at_one < 1e-5);
    }
    if r.is_zero() {
        assert_eq!(r.region, Some(Region::Zero));
    }
}

#[test]
fn large_data_diverges() {
    let spec = example();
    let op = Operator::with_nodes(&spec, 128).unwrap();
    let r = solve(&op, &constant_state(op.grid(), [20.0, 20.0]), &SolveSettings::default()).unwrap();
    assert_eq!(r.outcome, Outcome::Diverged);
    assert!(!r.converged && !r.trace.is_empty());
}

#[test]
fn bad_settings_rejected() {
    let spec = example();
    let op = Operator::with_nodes(&spec, 64).unwrap();
    let x = constant_state(op.grid(), [0.1, 0.1]);
    for damping in [0.0, 1.5] {
        let s = SolveSettings {
            damping,
            ..SolveSettings::default()
        };
        assert!(solve(&op, &x, &s).is_err());
    }
    assert!(Operator::with_nodes(&spec, 32).is_err());
    let other = Grid::graded(100, 3.0, &[]).unwrap();
    assert!(solve(&op, &constant_state(&other, [0.1, 0.1]), &SolveSettings::default()).is_err());
}

#[test]
fn subcritical_linear_problem_has_only_the_zero_solution() {
    let base = example();
    let k = base.constants().unwrap();
    let spec = base
        .with_envelopes(linear_envelopes([k[0].c.value / 2.0, k[1].c.value / 2.0]))
        .unwrap();
    let op = Operator::with_nodes(&spec, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let x = random_state(op.grid(), &mut rng, 5.0);
        let r = solve(&op, &x, &SolveSettings::default()).unwrap();
        assert!(r.converged);
        assert!(r.cone.iter().all(|c| c.sup_norm < 1e-6));
    }
    let boxes = BoxPair::new([0.1, 0.1], [1.0, 1.0], Some([10.0, 10.0])).unwrap();
    let found = multi_start(&op, &boxes, &SolveSettings::default()).unwrap();
    assert_eq!(found.len(), 1);
    assert!(found[0].cone.iter().all(|c| c.sup_norm < 1e-6));
}

#[test]
fn zero_forcing_multi_start_finds_one_solution() {
    let spec = local_spec("0", "0");
    let op = Operator::with_nodes(&spec, 64).unwrap();
    let boxes = BoxPair::new([0.5, 0.5], [1.0, 1.0], None).unwrap();
    let found = multi_start(&op, &boxes, &SolveSettings::default()).unwrap();
    assert_eq!(found.len(), 1);
    assert!(found[0].is_zero());
}

#[test]
fn example_multi_start_finds_a_positive_profile() {
    let spec = example();
    let op = Operator::with_nodes(&spec, 512).unwrap();
    let boxes = *spec.boxes().unwrap();
    let found = multi_start(&op, &boxes, &SolveSettings::default()).unwrap();
    let pos = found
        .iter()
        .find(|r| r.cone.iter().all(|c| c.sup_norm > 1e-3))
        .expect("a nonzero solution");
    assert!(pos.residual < 1e-8 && pos.cone_ok());
    // 2u - 4 ∂u/∂r = u(r(1/2)) at r = 1, for the first component.
    let rows = pull_back_profile(&pos.state[0], spec.geometry()).unwrap();
    let at1 = rows.iter().find(|r| r.r == 1.0).unwrap();
    let at_half = rows.iter().find(|r| r.t == 0.5).unwrap();
    let res = 2.0 * at1.w - 4.0 * at1.dw_dr - at_half.w;
    assert!(res.abs() < 1e-4, "Robin residual {res}");
}
