fn main() {
    use behavior_hmm::perception::*;
    use behavior_hmm::simulator::*;
    for sigma in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let noise = NoiseParams { accel_sigma: sigma, ..NoiseParams::default() };
        let quant = QuantizerConfig::default();
        // Zero-noise fidelity: 12 cases.
        let mut fid = 0;
        for kind in BehaviorKind::ALL {
            for dir in [Direction::Ccw, Direction::Cw] {
                let mut cfg = RunConfig::noiseless(1);
                cfg.direction = dir;
                let run = simulate_behavior(kind, &cfg).unwrap();
                let events = events_from_positions(&run.measurements, noise, quant).unwrap();
                let got: Vec<usize> = events.iter().map(|e| e.symbol).collect();
                let want = match dir {
                    Direction::Ccw => BehaviorTemplate::standard(kind).expected_symbols(quant.n_bins),
                    Direction::Cw => BehaviorTemplate::standard(kind)
                        .expected_symbols(quant.n_bins)
                        .iter()
                        .map(|&s| (quant.n_bins - s) % quant.n_bins)
                        .collect(),
                };
                if got == want { fid += 1; } else if sigma == 1.5 {
                    println!("  MISMATCH {kind:?} {dir:?}: want {want:?} got {got:?}");
                }
            }
        }
        // Noisy stability: 100 seeded rectangle runs at random scale, count exact event matches.
        let mut stable = 0;
        let mut concave_ok = 0;
        for seed in 0..100u64 {
            let cfg = RunConfig::randomized(seed);
            let run = simulate_behavior(BehaviorKind::Rectangle, &cfg).unwrap();
            let events = events_from_positions(&run.measurements, noise, quant).unwrap();
            if events.len() == 4 { stable += 1; }
            let run = simulate_behavior(BehaviorKind::ConcaveBox, &cfg).unwrap();
            let events = events_from_positions(&run.measurements, noise, quant).unwrap();
            if events.len() == 6 { concave_ok += 1; }
        }
        println!("sigma={sigma}: zero-noise fidelity {fid}/12, rect stable {stable}/100, concave stable {concave_ok}/100");
    }
}
