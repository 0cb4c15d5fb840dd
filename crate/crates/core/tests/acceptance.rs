//! Runs every acceptance criterion and prints one line per criterion.
//! Uses its own harness so the lines show up without `--nocapture`.

use std::process::ExitCode;

use qcoin_core::acceptance::{mutated_f_star, Suite};

fn main() -> ExitCode {
    let results = Suite::default().run_all_with(|r| {
        println!(
            "[{}] criterion {:>2} {:<28} {:>7.2}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.seconds,
            r.detail
        );
    });
    let mut ok = results.len() == 11 && results.iter().all(|r| r.passed);

    // A wrong regime boundary must be caught.
    let suite = Suite {
        f_star: mutated_f_star,
        ..Suite::default()
    };
    match suite.run(2) {
        Some(r) if !r.passed => println!("[PASS] mutated f* rejected: {}", r.detail),
        Some(r) => {
            println!("[FAIL] mutated f* accepted: {}", r.detail);
            ok = false;
        }
        None => {
            println!("[FAIL] criterion 2 is missing");
            ok = false;
        }
    }

    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
