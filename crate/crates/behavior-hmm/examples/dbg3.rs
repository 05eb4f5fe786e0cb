fn main() {
    use behavior_hmm::harness::*;
    use behavior_hmm::perception::*;
    use behavior_hmm::recognizer::*;
    use behavior_hmm::simulator::*;
    let dir = std::path::PathBuf::from("/tmp/exp1");
    let config = ExperimentConfig::with_output_dir(dir.clone());
    let set = load_behavior_set(&dir.join("models")).unwrap();
    for (behavior, run_idx) in [("rectangle", 1u64), ("rectangle", 4), ("trapezoid", 0)] {
        let kind: BehaviorKind = behavior.parse().unwrap();
        let seed = derive_seed(config.seed, &format!("eval-{behavior}"), run_idx);
        let rc = RunConfig::randomized(seed);
        let run = simulate_behavior(kind, &rc).unwrap();
        let events = events_from_positions(&run.measurements, config.noise, config.quantizer).unwrap();
        let mut session = set.start_session();
        println!("== {behavior} r{run_idx} scale {:.2} {:?}", rc.scale, rc.direction);
        for event in &events {
            let report = session.step(event.timestamp, event.symbol).unwrap();
            let pct = run.fraction_executed_at(event.timestamp).min(1.0);
            let ls: Vec<String> = report
                .names
                .iter()
                .zip(&report.likelihoods)
                .map(|(k, v)| format!("{}={v:.3}", &k[..3]))
                .collect();
            println!("  sym {} @{:.0}%: {} -> {}", event.symbol, pct * 100.0, ls.join(" "), report.argmax);
        }
    }
}
