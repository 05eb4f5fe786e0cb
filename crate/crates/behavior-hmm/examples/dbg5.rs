fn main() {
    use behavior_hmm::harness::derive_seed;
    use behavior_hmm::perception::*;
    use behavior_hmm::simulator::*;
    let cases = [
        (BehaviorKind::ConvexBox, 1),
        (BehaviorKind::ConvexBox, 6),
        (BehaviorKind::ConvexBox, 7),
        (BehaviorKind::Trapezoid, 1),
        (BehaviorKind::Trapezoid, 4),
        (BehaviorKind::Hourglass, 5),
        (BehaviorKind::ConcaveBox, 1),
        (BehaviorKind::ConcaveBox, 2),
        (BehaviorKind::ConcaveBox, 6),
    ];
    for (kind, idx) in cases {
        let seed = derive_seed(0, &format!("eval-{}", kind.name()), idx);
        let rc = RunConfig::randomized(seed);
        let run = simulate_behavior(kind, &rc).unwrap();
        let events =
            events_from_positions(&run.measurements, NoiseParams::default(), QuantizerConfig::default())
                .unwrap();
        let seq: Vec<String> =
            events.iter().map(|e| format!("{}({:+.0})", e.symbol, e.turn_angle)).collect();
        println!(
            "{:12} r{} scale {:.2} dir {:?} -> {}",
            kind.name(),
            idx,
            rc.scale,
            rc.direction,
            seq.join(" ")
        );
    }
}
