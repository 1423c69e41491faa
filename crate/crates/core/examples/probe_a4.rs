use ising_core::exact::{branch_and_bound, BnbOptions};
use ising_core::generate::{gen_mobius_ladder, gen_mobius_two_edge_rewired, rewire};
use ising_core::seed::derive;
use ising_core::spectral::osc_check;
use std::time::Instant;

fn main() {
    let opts = BnbOptions {
        node_budget: Some(20_000),
        odd_cycle_bound: true,
        ..Default::default()
    };
    for n_half in [5usize, 9, 25, 51, 101, 201, 301, 401, 499] {
        let inst = gen_mobius_two_edge_rewired(n_half).unwrap();
        let t0 = Instant::now();
        let rep = branch_and_bound(&inst, &opts).unwrap();
        let t_bnb = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let v = osc_check(&inst, rep.best_energy).unwrap();
        let t_osc = t1.elapsed().as_secs_f64();
        let tol = 1e-9 * rep.best_energy.abs().max(1.0);
        let violated = v.e_lambda_energy > rep.best_energy + tol;
        println!(
            "recipe n_half={n_half}: violated={violated} W={} e_lambda={} status={:?} nodes={} bnb={t_bnb:.2}s osc={t_osc:.2}s",
            rep.best_energy, v.e_lambda_energy, rep.status, rep.nodes_explored
        );
    }
    for (si, n_half) in [8usize, 120, 500].iter().enumerate() {
        let base = gen_mobius_ladder(*n_half).unwrap();
        for r in 0..3u64 {
            let probe = rewire(&base, 1, derive(4, &[si as u64, r]), true)
                .unwrap()
                .instance;
            let t0 = Instant::now();
            let rep = branch_and_bound(&probe, &opts).unwrap();
            let t_bnb = t0.elapsed().as_secs_f64();
            let v = osc_check(&probe, rep.best_energy).unwrap();
            let tol = 1e-9 * rep.best_energy.abs().max(1.0);
            let violated = v.e_lambda_energy > rep.best_energy + tol;
            println!(
                "probe n_half={n_half} r={r}: violated={violated} W={} e_lambda={} nodes={} bnb={t_bnb:.2}s",
                rep.best_energy, v.e_lambda_energy, rep.nodes_explored
            );
        }
    }
}
