//! Scratch harness for sizing the desk-scale comparison runs.
//!
//! ```sh
//! cargo run --release -p adcol --example calibrate -- poisson 3000 1024 32 2
//! ```

use adcol::problems::PdeProblem;
use adcol::trainer::{train, InitScheme, SamplerKind, SamplerSettings, TrainingConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("poisson");
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let n: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1024);
    let width: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(32);
    let trials: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(2);
    let dim: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(5);
    let lambda: f64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(10.0);


    let problem = match which {
        "poisson" => PdeProblem::poisson2d(),
        "elliptic" => PdeProblem::elliptic(dim).unwrap(),
        "parabolic" => PdeProblem::parabolic(dim).unwrap(),
        other => panic!("unknown problem {other}"),
    };
    let init = match std::env::var("INIT").as_deref() {
        Ok("xavier") => InitScheme::Xavier,
        _ => InitScheme::FanBias,
    };
    let p_exp: f64 = std::env::var("P").ok().and_then(|v| v.parse().ok()).unwrap_or(1.0);
    let pool_mult: usize = std::env::var("POOL").ok().and_then(|v| v.parse().ok()).unwrap_or(1);
    let adaptive_boundary = std::env::var("ADB").map(|v| v != "0").unwrap_or(true);
    let burn_in: usize = std::env::var("BURN").ok().and_then(|v| v.parse().ok()).unwrap_or(0);
    let arm = std::env::var("ARM").unwrap_or_else(|_| "self_normalized".into());
    let base = TrainingConfig {
        init,
        epochs,
        n1: n,
        n2: Some(n),
        lambda,
        width,
        depth: 3,
        eval_every: (epochs / 10).max(1),
        test_points: 10_000,
        sampler: SamplerSettings { annuli: 8, ..SamplerSettings::default() },
        ..TrainingConfig::default()
    };

    for trial in 0..trials {
        let seed = 2000 + trial as u64;
        let adaptive_kind = match arm.as_str() {
            "mh" => SamplerKind::MetropolisHastings,
            "rar" => SamplerKind::Rar,
            _ => SamplerKind::SelfNormalized,
        };
        for kind in [SamplerKind::Annular, adaptive_kind] {
            let config = TrainingConfig {
                seed,
                sampler: SamplerSettings {
                    kind,
                    annuli: 8,
                    exponent: p_exp,
                    pool_size: Some(n * pool_mult),
                    burn_in,
                    adaptive_boundary,
                    rar_base: n * 5 / 6,
                    rar_top_k: n - n * 5 / 6,
                    ..SamplerSettings::default()
                },
                ..base.clone()
            };
            let t0 = std::time::Instant::now();
            let out = train::<f64>(&problem, &config).unwrap();
            let last = out.history.last().unwrap();
            println!(
                "{which} seed={seed} sampler={kind:?}: rel_l2={:.4} max_mod={:.4} loss={:.3e} diverged={} wall={:.1}s",
                last.rel_l2,
                last.max_mod,
                last.loss,
                out.diverged.is_some(),
                t0.elapsed().as_secs_f64()
            );
            for row in out.history.rows().iter().step_by(2) {
                println!("    epoch {:>5}  loss {:.3e}  rel_l2 {:.4}  max {:.4}", row.epoch, row.loss, row.rel_l2, row.max_mod);
            }
        }
    }
}
