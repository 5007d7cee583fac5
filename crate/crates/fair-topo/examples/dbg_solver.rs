use fair_topo::solver::*;
use fair_topo::synth::*;
use fair_topo::*;
use std::time::Instant;

fn main() {
    let spec = RewireSpec { across_ratio: 0.5, seed: 3, ..RewireSpec::default() };
    let (a_true, groups) = generate_two_group_graph(&spec).unwrap();
    let filt = well_conditioned_filter(&a_true, 3, 11).unwrap();
    let t0 = Instant::now();
    let x = sample_signals(&filt, &a_true, 100_000, 21).unwrap();
    let c = sample_covariance(&x).unwrap();
    println!("sampling: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let cset = ConstraintSet::default();
    let ctx = SolverContext::new(&c, &cset).unwrap();
    println!("context (incl anchor): {:?}", t0.elapsed());
    println!("cov frob = {:.4}, min_comm = {:.6e}, default eps = {:.6e}",
        c.frob_norm(), ctx.min_commutativity(), 0.1 * c.frob_norm() * 30.0 / (100_000f64).sqrt());

    for (tag, tol_abs, tol_rel) in [("tight", 1e-7, 1e-5), ("loose", 1e-5, 1e-4)] {
        for (name, beta, pen) in [("none", 0.0, Penalty::None), ("dp", 100.0, Penalty::Dp), ("nw", 100.0, Penalty::DpNode)] {
            let cfg = SolveConfig { beta, penalty: pen, tol_abs, tol_rel, ..SolveConfig::default() };
            let t = Instant::now();
            let rep = ctx.solve(&groups, &cfg).unwrap();
            let el = t.elapsed();
            let nb = bias_report(&rep.a_hat, &groups).unwrap().normalized_bias.unwrap_or(f64::NAN);
            println!("{tag}/{name}: conv={} iters={:6} t={:?} l1={:.3} bias={:.4} comm/eps={:.3}",
                rep.converged, rep.iterations, el, rep.objective_l1, nb, rep.commut_residual / rep.epsilon);
        }
    }
}
