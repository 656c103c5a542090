//! Drought detection on a bucket-model storage series: pumping ramps up
//! from month 120, storage decouples from recharge, and a persistent
//! drought forms at the end of the record.
//!
//! Run with `cargo run --example drought_events`.

use gwdrought::drought::{detect_events, fill_gaps_linear, period_change};
use gwdrought::month::{MonthIndex, MonthRange};
use gwdrought::synth::{gen_ar1, gen_bucket, BucketModelConfig};

fn month(y: i32, m: u8) -> MonthIndex {
    MonthIndex::new(y, m).unwrap()
}

fn main() {
    let n = 180;
    let precip = gen_ar1(n, 0.0, 12.0, 3, month(2002, 1))
        .unwrap()
        .map(|v| v + 90.0);

    // Storage bucket: half of precipitation recharges, 15% drains per
    // month, and from January 2012 pumping grows by 1.5 mm/month each
    // month.
    let cfg = BucketModelConfig::no_pumping(0.5, 0.15, 300.0, 2.0, 11, n).ramp_pumping(120, 1.5);
    let anomaly = gen_bucket(&cfg, &precip).unwrap();
    let anomaly = fill_gaps_linear(&anomaly).unwrap();

    let catalog = detect_events(&anomaly, 3, "bucket-demo");
    println!(
        "detected {} events (runs of >= 3 below-normal months):",
        catalog.events.len()
    );
    println!(
        "{:>9} {:>9} {:>10} {:>12} {:>10}",
        "start", "end", "months", "peak (mm)", "persistent"
    );
    for e in &catalog.events {
        println!(
            "{:>9} {:>9} {:>10} {:>12.1} {:>10}",
            e.start.to_string(),
            e.end.to_string(),
            e.duration,
            e.peak_departure,
            e.persistent
        );
    }

    if let Some((v, m)) = catalog.wettest {
        println!("\nwettest month: {m} ({v:+.1} mm)");
    }
    if let Some((v, m)) = catalog.driest {
        println!("driest month:  {m} ({v:+.1} mm)");
    }

    let early = MonthRange::new(month(2002, 1), month(2004, 12)).unwrap();
    let late = MonthRange::new(month(2014, 1), month(2016, 12)).unwrap();
    let change = period_change(&anomaly, early, late).unwrap();
    println!("\nlate-period mean vs early-period mean: {change:+.0}%");
    println!("(the ramp starts at 2012-01; everything after it sinks below normal)");
}
