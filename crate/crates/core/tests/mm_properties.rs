use fronthaul::gib::{info_rate, PerUseRate, SnrPoint};
use fronthaul::mm::{
    convexity_check, dc_objective, mm_solve, mm_solve_multistart, mm_step, surrogate_objective, EigenChannel,
    MmOptions, MmState,
};
use fronthaul::oracle::grid_oracle_discrete;
use fronthaul::spectral::{solve, Tolerances};
use fronthaul::ChannelGrid;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn eigen(max_n: usize) -> impl Strategy<Value = EigenChannel> {
    prop::collection::vec(0.05..3.0f64, 1..=max_n).prop_map(|v| EigenChannel::new(v).unwrap())
}

proptest! {
    #[test]
    fn objective_is_sum_of_info_rates(v in prop::collection::vec((0.0..5.0f64, -3.0..3.0f64, 0.0..4.0f64), 1..6)) {
        let e = EigenChannel::new(v.iter().map(|t| t.0).collect()).unwrap();
        let l: Vec<f64> = v.iter().map(|t| t.1).collect();
        let c: Vec<f64> = v.iter().map(|t| t.2).collect();
        let direct: f64 = v
            .iter()
            .map(|&(lam, l, c)| info_rate(SnrPoint::new(lam * l.exp()).unwrap(), PerUseRate::finite(c).unwrap()))
            .sum();
        prop_assert!((dc_objective(&e, &l, &c) - direct).abs() <= 1e-12);
    }

    #[test]
    fn hessians_are_psd(lam in 1e-3..10.0f64, samples in prop::collection::vec((-5.0..5.0f64, 0.0..5.0f64), 100)) {
        prop_assert!(convexity_check(&EigenChannel::new(vec![lam]).unwrap(), &samples));
    }

    #[test]
    fn surrogate_minorizes(e in eigen(4), seed in prop::collection::vec((-2.0..2.0f64, 0.0..3.0f64, -2.0..2.0f64, 0.0..3.0f64), 4)) {
        let n = e.len();
        let lk: Vec<f64> = seed[..n].iter().map(|t| t.0).collect();
        let ck: Vec<f64> = seed[..n].iter().map(|t| t.1).collect();
        let l: Vec<f64> = seed[..n].iter().map(|t| t.2).collect();
        let c: Vec<f64> = seed[..n].iter().map(|t| t.3).collect();
        prop_assert!((surrogate_objective(&e, &lk, &lk, &ck) - dc_objective(&e, &lk, &ck)).abs() <= 1e-12);
        prop_assert!(surrogate_objective(&e, &lk, &l, &c) <= dc_objective(&e, &l, &c) + 1e-12);
    }

    #[test]
    fn mm_ascends_and_meets_budgets(e in eigen(5), p in 0.2..20.0f64, c in 0.1..8.0f64) {
        let sol = mm_solve(&e, p, c, None, &MmOptions::default()).unwrap();
        for w in sol.trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10, "{} -> {}", w[0], w[1]);
        }
        let st = &sol.state;
        let power: f64 = st.powers().iter().sum();
        let rate: f64 = st.c.iter().sum();
        prop_assert!((power - p).abs() <= 1e-6 * p && (rate - c).abs() <= 1e-6 * c);
        prop_assert!(st.c.iter().all(|&x| x >= 0.0));
        prop_assert!(st.nu1 > 0.0 && st.nu2 > 0.0);
    }

    #[test]
    fn interior_steps_have_positive_multipliers(e in eigen(4), p in 0.5..10.0f64, c in 2.0..8.0f64) {
        let st = mm_step(&e, &MmState::uniform(&e, p, c), p, c).unwrap();
        if !st.fallback {
            prop_assert!(st.nu1 > 0.0 && st.nu2 > 0.0);
        }
    }
}

/// Five starts do not always escape the interior local maximum when the
/// optimum parks everything on one channel; the miss rate is bounded, not zero.
#[test]
fn multistart_against_discrete_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let total = 120;
    let (mut misses, mut worst) = (0, 0.0f64);
    for t in 0..total {
        let n = 1 + t % 3;
        let e = EigenChannel::new((0..n).map(|_| rng.random_range(0.05..3.0)).collect()).unwrap();
        let p = rng.random_range(0.2..10.0);
        let c = rng.random_range(0.1..5.0);
        let m = mm_solve_multistart(&e, p, c, 5, t as u64, &MmOptions::default()).unwrap();
        let o = grid_oracle_discrete(&e, p, c, 60).unwrap().objective;
        let gap = (o - m.state.obj) / o;
        worst = worst.max(gap);
        if gap > 1e-2 {
            misses += 1;
        }
    }
    println!("multistart misses: {misses}/{total}, worst relative gap {worst:.3e}");
    assert!(misses * 20 <= total, "{misses} misses");
    assert!(worst < 5e-2);
}

#[test]
fn asymmetric_pair_against_oracle() {
    let e = EigenChannel::new(vec![2.0, 0.5]).unwrap();
    let m = mm_solve_multistart(&e, 4.0, 2.0, 5, 0, &MmOptions::default()).unwrap();
    let o = grid_oracle_discrete(&e, 4.0, 2.0, 60).unwrap();
    assert!((m.state.obj - o.objective).abs() <= 1e-2 * o.objective);
    assert!((o.objective - 1.030_244_4).abs() < 1e-6);
}

/// Half-Hz bins carry one real channel use per bin, so the discrete problem
/// maps onto the spectral one with power halved.
#[test]
fn unit_bridge_to_spectral_solver() {
    for (lam, p, c) in [(vec![1.0, 0.7], 6.0, 4.0), (vec![2.0, 1.5, 1.2], 9.0, 6.0), (vec![0.9], 3.0, 3.0)] {
        let e = EigenChannel::new(lam.clone()).unwrap();
        let m = mm_solve_multistart(&e, p, c, 5, 0, &MmOptions::default()).unwrap();
        let g = ChannelGrid::new(lam.len() as f64 / 2.0, lam).unwrap();
        let s = solve(&g, p / 2.0, c, &Tolerances::default()).unwrap();
        assert!(s.allocation.occupancy.iter().all(|&o| o == 1.0));
        assert!((s.allocation.info - m.state.obj).abs() <= 1e-2 * m.state.obj);
    }
}

#[test]
fn equal_eigenvalues_with_scarce_rate() {
    let e = EigenChannel::new(vec![1.0; 4]).unwrap();
    let m = mm_solve_multistart(&e, 8.0, 0.4, 5, 11, &MmOptions::default()).unwrap();
    let on: Vec<f64> = m.state.c.iter().copied().filter(|&c| c > 1e-6).collect();
    assert!(on.len() < 4);
    let o = grid_oracle_discrete(&EigenChannel::new(vec![1.0; 3]).unwrap(), 8.0, 0.4, 60).unwrap();
    assert!(m.state.obj >= o.objective * (1.0 - 1e-2));
    let floor = on.iter().map(|c| 2.0 * c).fold(f64::INFINITY, f64::min);
    println!("smallest active 2 C_n = {floor:.4} (ln 2 = {:.4})", std::f64::consts::LN_2);
}
