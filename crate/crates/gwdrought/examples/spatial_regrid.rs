//! Grid machinery: nearest-cell lookup for station data, majority
//! resampling of categorical land-use onto a coarser grid, and masked
//! block-mean aggregation.
//!
//! Run with `cargo run --example spatial_regrid`.

use gwdrought::grid::{
    block_mean_resample, majority_resample, nearest_cell, regional_mean, CategoricalGrid, Grid2D,
    GriddedSeries, RegionMask, Weighting,
};
use gwdrought::month::{MonthIndex, TimeAxis};

fn main() {
    // A one-degree grid with cell centers at 8.5..11.5 N, 68.5..71.5 E.
    let coarse = Grid2D::new(8.5, 68.5, 1.0, 1.0, 4, 4).unwrap();

    // Stations snap to the nearest cell center.
    for (lat, lon) in [(9.4, 68.6), (8.5, 68.5), (11.99, 71.99)] {
        let (i, j) = nearest_cell(&coarse, lat, lon).unwrap();
        let (clat, clon) = coarse.center(i, j);
        println!("station ({lat:>5}, {lon:>5}) -> cell ({i}, {j}) centered ({clat}, {clon})");
    }

    // Quarter-degree land-use classes, aggregated by majority vote.
    let fine = Grid2D::new(8.125, 68.125, 0.25, 0.25, 16, 16).unwrap();
    let classes: Vec<i64> = fine
        .cells()
        .map(|(i, j)| if (i + j) % 3 == 0 { 2 } else { 1 })
        .collect();
    let lulc = CategoricalGrid::new(fine, classes).unwrap();
    let lulc_coarse = majority_resample(&lulc, &coarse).unwrap();
    println!("\nmajority class per one-degree cell (1 = crop, 2 = other):");
    for i in (0..4).rev() {
        let row: Vec<String> = (0..4)
            .map(|j| lulc_coarse.class(i, j).to_string())
            .collect();
        println!("  {}", row.join(" "));
    }

    // Masked block mean: only crop cells contribute to the coarse value.
    let axis = TimeAxis::new(MonthIndex::new(2002, 1).unwrap(), 1).unwrap();
    let values: Vec<Option<f64>> = fine
        .cells()
        .map(|(i, j)| Some(if lulc.class(i, j) == 1 { 0.6 } else { 0.1 }))
        .collect();
    let ndvi = GriddedSeries::new(fine, axis, values, "ndvi").unwrap();
    let crop_ndvi = block_mean_resample(&ndvi, &coarse, Some((&lulc, 1))).unwrap();
    println!(
        "\ncrop-masked mean of the mixed field: {:.3} (raw mean would be {:.3})",
        crop_ndvi.get(0, 0, 0).unwrap(),
        block_mean_resample(&ndvi, &coarse, None)
            .unwrap()
            .get(0, 0, 0)
            .unwrap()
    );

    // Area-weighted regional means use cos(latitude) weights by default.
    let membership = coarse
        .cells()
        .map(|(i, _)| {
            Some(if i < 2 {
                "south".to_string()
            } else {
                "north".to_string()
            })
        })
        .collect();
    let regions = RegionMask::new(coarse, membership, None).unwrap();
    let field = GriddedSeries::new(
        coarse,
        axis,
        coarse.cells().map(|(i, _)| Some(i as f64)).collect(),
        "x",
    )
    .unwrap();
    for region in ["south", "north"] {
        let series = regional_mean(&field, &regions, region, Weighting::CosLat).unwrap();
        println!("regional mean ({region}): {:.3}", series.get(0).unwrap());
    }
}
