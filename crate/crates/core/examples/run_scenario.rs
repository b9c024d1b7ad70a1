//! Drive the batch runner from code: build a scenario, run every suite and
//! summarise the verdicts without touching the disk.

use kvnlab::cli::report::Verdict;
use kvnlab::cli::run_scenario;
use kvnlab::cli::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = r#"{
        "suite": "all",
        "potential": {"g": 1.0, "n": 4.0},
        "lms": {"alpha": 1.5},
        "seed": 3
    }"#;
    let scenario = Scenario::from_json(text).map_err(|errs| errs.join("; "))?;
    let out = run_scenario(scenario, 3)?;
    for s in &out.report.suites {
        println!("{:<14} {:>3} pass {:>3} fail {:>3} skipped", s.suite, s.counts.pass, s.counts.fail, s.counts.skipped);
    }
    for r in out.report.records.iter().filter(|r| r.verdict != Verdict::Pass) {
        println!("{:?} {} {:?}", r.verdict, r.id, r.note);
    }
    println!("{} series, digest {}", out.series.len(), out.report.scenario_digest);
    Ok(())
}
