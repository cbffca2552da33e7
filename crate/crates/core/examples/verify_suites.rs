//! Run several verification suites and print their check tables.
//!
//!     cargo run --release --example verify_suites

use meetwalk::collision::DEFAULT_CAPACITY;
use meetwalk::verify::{
    default_identity_speeds, default_speed_grid, identity_suite, speeds_suite, structural_suite, transitive_suite,
    StructuralOptions, VerificationReport,
};
use meetwalk::Family;

fn main() -> meetwalk::Result<()> {
    let fams = Family::parse_list("cycle:3..6,complete:3..5,hypercube:2..3")?;
    let mut report = VerificationReport::new("examples");
    report.merge(transitive_suite(&fams, DEFAULT_CAPACITY)?);
    report.merge(speeds_suite(&Family::parse_list("complete:8")?, &default_speed_grid(), DEFAULT_CAPACITY)?);
    report.merge(identity_suite(&Family::parse_list("cycle:7")?, &default_identity_speeds())?);
    report
        .merge(structural_suite(&Family::parse_list("cycle:4,hypercube:3,trap:2@12")?, &StructuralOptions::default())?);
    print!("{}", report.table());
    let (pass, fail, skip) = report.counts();
    println!("\ntotal: {pass} passed, {fail} failed, {skip} skipped");
    Ok(())
}
