//! Generates the bundled synthetic scenario on disk and prints its ground
//! truth. The emitted `scenario.config` drives the command-line pipeline:
//!
//! ```text
//! gwdrought --config <dir>/scenario.config --out <dir>/out anomaly
//! gwdrought --config <dir>/scenario.config --out <dir>/out optimal-period
//! gwdrought --config <dir>/scenario.config --out <dir>/out ndvi-prep
//! gwdrought --config <dir>/scenario.config --out <dir>/out drought
//! gwdrought --config <dir>/scenario.config --out <dir>/out attribute
//! gwdrought --config <dir>/scenario.config --out <dir>/out report
//! ```
//!
//! Run with `cargo run --example synthetic_scenario -- [directory]`.

use gwdrought::scenario::SyntheticScenario;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "scenario_out".to_string());
    let scenario = SyntheticScenario::bundled(42).unwrap();
    let files = scenario.write_to(std::path::Path::new(&dir)).unwrap();

    println!("wrote {} files under {dir}/:", files.len());
    for f in &files {
        println!("  {}", f.display());
    }

    let truth = &scenario.truth;
    println!("\nground truth (also in truth.json):");
    println!("  construction accumulation periods:");
    for (region, k) in &truth.optimal_period_months {
        println!("    {region}: {k} months (storage field)");
    }
    for (region, k) in &truth.well_optimal_period_months {
        println!("    {region}: {k} months (well levels)");
    }
    println!(
        "  pumping ramp in {} from {}",
        truth.pumping_region, truth.pumping_start
    );
    println!(
        "  {} storage is precipitation-only, so its vegetation share is ~0",
        truth.precip_only_region
    );
}
