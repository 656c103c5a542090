//! Storage anomalies from both input routes: a total-storage field minus a
//! surface-storage ensemble, and well levels scaled by specific yield.
//!
//! Run with `cargo run --example anomaly_pipeline`.

use gwdrought::anomaly::{
    grace_gwsa, monthly_climatology, remove_climatology, standardize, well_gwsa, StationRecord,
};
use gwdrought::grid::{regional_mean, Weighting};
use gwdrought::month::{MonthIndex, MonthRange};
use gwdrought::scenario::SyntheticScenario;

fn month(y: i32, m: u8) -> MonthIndex {
    MonthIndex::new(y, m).unwrap()
}

fn main() {
    let scenario = SyntheticScenario::bundled(42).unwrap();

    // Satellite route: subtract the surface-storage ensemble mean from the
    // total-storage anomaly, cell by cell.
    let surface: Vec<_> = scenario.sws.iter().map(|(_, f)| f.clone()).collect();
    let gwsa = grace_gwsa(&scenario.twsa, &surface).unwrap();
    println!(
        "storage-anomaly field: {} months x {} cells",
        gwsa.axis().len(),
        gwsa.grid().ncells()
    );

    // Regional mean with cos(latitude) area weights, then standardized.
    let si = regional_mean(&gwsa, &scenario.regions, "SI", Weighting::CosLat).unwrap();
    let si_std = standardize(&si).unwrap();
    println!("\nSI regional storage anomaly (first year, standardized):");
    for (m, v) in si_std.iter().take(12) {
        println!("  {m}  {:+.3}", v.unwrap());
    }

    // Monthly climatology removal on the regional series.
    let baseline = MonthRange::new(month(2002, 1), month(2016, 12)).unwrap();
    let climatology = monthly_climatology(&si, baseline).unwrap();
    let anomaly = remove_climatology(&si, &climatology);
    println!(
        "\nafter climatology removal: mean of January values = {:+.3e} mm",
        (0..15)
            .filter_map(|y| anomaly.at(month(2002 + y, 1)))
            .sum::<f64>()
            / 15.0
    );

    // Well route: one synthetic well, levels in meters below ground.
    let well = StationRecord::new(
        "DEMO-1",
        25.0,
        70.6,
        0.12,
        vec![
            (month(2002, 1), 5.0),
            (month(2002, 5), 5.6),
            (month(2002, 8), 4.9),
            (month(2002, 11), 5.2),
            (month(2003, 1), 6.0), // one meter deeper than the 2002 January level
        ],
    )
    .unwrap();
    let well_anomaly = well_gwsa(
        &well,
        MonthRange::new(month(2002, 1), month(2002, 12)).unwrap(),
    )
    .unwrap();
    println!("\nwell DEMO-1 storage anomalies (mm of water):");
    for (m, v) in well_anomaly.iter() {
        if let Some(v) = v {
            println!("  {m}  {v:+.1}");
        }
    }
    println!("(a deeper water table means less storage, hence the sign flip)");
}
