use std::process::ExitCode;

use diffext_suite::*;

fn main() -> ExitCode {
    let runs: [fn() -> Criterion; 9] =
        [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9];
    let mut done = Vec::new();
    for run in runs {
        let c = run();
        print_criterion(&c);
        done.push(c);
    }
    let last = criterion_10(&done);
    print_criterion(&last);
    done.push(last);

    println!();
    println!("tolerance: exact (zero)");
    for c in &done {
        println!("criterion {:>2}: {} {}", c.number, if c.pass { "PASS" } else { "FAIL" }, c.title);
    }
    if done.iter().all(|c| c.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn print_criterion(c: &Criterion) {
    println!("criterion {:>2}: {} {}", c.number, if c.pass { "PASS" } else { "FAIL" }, c.title);
    for n in &c.notes {
        println!("    {n}");
    }
}
