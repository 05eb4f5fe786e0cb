fn main() {
    use behavior_hmm::harness::*;
    let dir = std::path::PathBuf::from("/tmp/exp1");
    let _ = std::fs::remove_dir_all(&dir);
    let config = ExperimentConfig::with_output_dir(dir);
    let t0 = std::time::Instant::now();
    match run_full_experiment(&config) {
        Ok(summary) => {
            eprintln!("elapsed {:.1} s", t0.elapsed().as_secs_f64());
            println!("{}", serde_json::to_string(&summary).unwrap());
        }
        Err(e) => println!("ERROR: {e}"),
    }
}
