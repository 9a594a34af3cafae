//! Acceptance gate: one line per criterion, nonzero exit if any criterion
//! does not pass. Everything is computed from scratch.

use std::process::ExitCode;
use std::time::Instant;

use lat40::enumeration;
use lat40::fixtures::Fixtures;
use lat40::verify::{self, Status};

fn main() -> ExitCode {
    let start = Instant::now();
    let mut load = |lat: &lat40::Lattice| enumeration::vectors_of_norm_at_most_folded(lat, 4);
    let report = verify::run(Fixtures::embedded(), &verify::Options::default(), &mut load, &mut |c| {
        println!("{} criterion {:>2} [{}] ({} ms): {}", c.status, c.id, c.name, c.wall_ms, c.computed);
        if c.status != Status::Pass {
            println!("    expected: {}", c.expected);
        }
    });
    let passed = report.claims.iter().filter(|c| c.status == Status::Pass).count();
    println!("{passed}/{} criteria passed in {:.0} s", report.claims.len(), start.elapsed().as_secs_f64());
    if report.claims.len() == 11 && report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
