use batchscreen::*;

fn main() {
    let err = ErrorModel::new(0.03, 0.25).unwrap();
    let spec = ExperimentSpec {
        population_size: 100_000,
        infection_rates: vec![0.001, 0.01, 0.03, 0.05, 0.10],
        err,
        strategies: Strategy::paper_set(),
        repetitions: 30,
        master_seed: 20200501,
        pilot: PilotSpec::default(),
        rate_cutoff: DEFAULT_RATE_CUTOFF,
    };
    let report = run_experiment(&spec).unwrap();
    for cell in &report.cells {
        println!(
            "{} p={:<5} acc={:.4} sens={:.4} spec={:.4} ppv={:.4} npv={:.4} tests={:.0} ({:.0}) B+I={:.0}+{:.0}",
            cell.label(), cell.rate,
            cell.accuracy.mean.unwrap(), cell.sensitivity.mean.unwrap(),
            cell.specificity.mean.unwrap(), cell.ppv.mean.unwrap(), cell.npv.mean.unwrap(),
            cell.total_tests.mean, cell.total_tests.std_dev,
            cell.batch_tests.mean, cell.individual_tests.mean,
        );
    }
}
