use cosserat::returnmap::{default_tol, integrate, Regime, compute_predictors, radial_dispatch};
use cosserat::verify::trials::{targeted_case, TrialRng};
use cosserat::verify::integrate_oracle;
use cosserat::tangent::{consistent_tangent, fd_tangent};
use cosserat::Tensor2;

fn main() {
    // (a) radial fd_tangent failure, seed 22
    {
        let mut rng = TrialRng(22);
        let mut done = 0;
        'outer: while done < 55 {
            let Some(case) = targeted_case(&mut rng, Regime::Radial) else { continue };
            let pred = compute_predictors(&case.state, &case.deps, &case.domega, &case.dchi, &case.model);
            let tol = default_tol(&case.model, case.state.lambda, &pred);
            let (stress, state, _) = integrate(&case.state, &case.deps, &case.domega, &case.dchi, &case.model, tol).unwrap();
            if stress.regime != Regime::Radial { continue; }
            let _an = consistent_tangent(&pred, &stress, state.lambda, state.lambda, &case.model).unwrap();
            let strain_scale = case.deps.norm().max(1e-4);
            match fd_tangent(&case.state, &case.deps, &case.domega, &case.dchi, &case.model, 1e-6 * strain_scale.max(1.0) + 1e-8) {
                Ok(_) => {}
                Err(e) => {
                    println!("(a) radial fd failure at trial {done}: {e}");
                    println!("    hardening {:?} G={} q*={} q_s*={} theta*={} p*={} tol={}",
                        case.model.hardening, case.model.moduli.shear, pred.q, pred.q_s, pred.theta_s, pred.p, tol);
                    println!("    M={} Mh={} shape const? {}", case.model.yield_slope, case.model.potential_slope,
                        matches!(case.model.yield_shape, cosserat::DeviatoricShape::Constant(_)));
                    println!("    converged q={} dl={}", stress.q, state.lambda);
                    break 'outer;
                }
            }
            done += 1;
        }
    }
    // (b) general regime mismatch, seed 303
    {
        let mut rng = TrialRng(303);
        let mut done = 0;
        while done < 120 {
            let Some(case) = targeted_case(&mut rng, Regime::General) else { continue };
            let pred = compute_predictors(&case.state, &case.deps, &case.domega, &case.dchi, &case.model);
            let tol = default_tol(&case.model, case.state.lambda, &pred);
            let (stress, state, _) = integrate(&case.state, &case.deps, &case.domega, &case.dchi, &case.model, tol).unwrap();
            let oracle = integrate_oracle(&case.state, &case.deps, &case.domega, &case.dchi, &case.model).unwrap();
            if stress.regime != oracle.stress.regime {
                println!("(b) mismatch trial {done}: kernel {:?} q={} theta={} dl={} | oracle {:?} q={} theta={} dl={}",
                    stress.regime, stress.q, stress.theta_s, state.lambda,
                    oracle.stress.regime, oracle.stress.q, oracle.stress.theta_s, oracle.dlambda);
                println!("    q*={} q_s*={} theta*={} p*={} M={} Mh={} hard={:?}", pred.q, pred.q_s, pred.theta_s, pred.p, case.model.yield_slope, case.model.potential_slope, case.model.hardening);
                break;
            }
            done += 1;
        }
        if done == 120 { println!("(b) no mismatch found in 120"); }
    }
    // (c) degenerate spectrum on zero-increment redispatch, seed 9001
    {
        let mut rng = TrialRng(9001);
        let mut count = 0;
        'outer2: for _ in 0..200000 {
            let Some(case) = targeted_case(&mut rng, Regime::Radial) else { continue };
            let pred = compute_predictors(&case.state, &case.deps, &case.domega, &case.dchi, &case.model);
            let tol = default_tol(&case.model, case.state.lambda, &pred);
            let Ok((_stress, state, _)) = integrate(&case.state, &case.deps, &case.domega, &case.dchi, &case.model, tol) else { continue };
            let z = Tensor2::zero();
            match integrate(&state, &z, &z, &z, &case.model, tol) {
                Ok(_) => {}
                Err(e) => {
                    let rp = compute_predictors(&state, &z, &z, &z, &case.model);
                    println!("(c) redispatch failure: {e}");
                    println!("    q*={} q_s*={} theta*={} degen={} radial_dispatch={}",
                        rp.q, rp.q_s, rp.theta_s, rp.lode_degenerate, radial_dispatch(&rp, &case.model));
                    println!("    f*={}", case.model.yield_fn(rp.p, rp.q, rp.theta_s, state.lambda));
                    println!("    stationary list: {:?}", case.model.stationary());
                    break 'outer2;
                }
            }
            count += 1;
            if count > 400 { println!("(c) no failure in 400 radial cases"); break; }
        }
    }
}
