fn main() {
    use behavior_hmm::perception::*;
    use behavior_hmm::simulator::*;
    for kind in BehaviorKind::ALL {
        for dir in [Direction::Ccw, Direction::Cw] {
            // zero noise
            let mut rc = RunConfig::noiseless(1);
            rc.direction = dir;
            let run = simulate_behavior(kind, &rc).unwrap();
            let ev = events_from_positions(&run.measurements, NoiseParams::default(), QuantizerConfig::default()).unwrap();
            let det: Vec<String> = ev.iter().map(|e| format!("{}({:.0})", e.symbol, e.turn_angle)).collect();
            let exp: Vec<String> = run.turn_events.iter().map(|e| format!("{}({:.0})", e.symbol, e.angle)).collect();
            println!("{:12} {:?} clean exp [{}] got [{}]", kind.name(), dir, exp.join(" "), det.join(" "));
            // noisy, scale 1
            for seed in 0..3u64 {
                let mut rc = RunConfig::fixed(100 + seed);
                rc.direction = dir;
                let run = simulate_behavior(kind, &rc).unwrap();
                let ev = events_from_positions(&run.measurements, NoiseParams::default(), QuantizerConfig::default()).unwrap();
                let det: Vec<String> = ev.iter().map(|e| format!("{}({:.0})", e.symbol, e.turn_angle)).collect();
                println!("{:12} {:?} s{}    got [{}]", kind.name(), dir, seed, det.join(" "));
            }
        }
    }
}
