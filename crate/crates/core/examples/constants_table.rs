//! Recompute the named growth bases and compare with their published
//! roundings.

use poset_ramsey::certifier::paper_constants;

fn main() {
    let table = paper_constants();
    println!("{:<20} {:>16} {:>12} {:>6}", "name", "value", "target", "pass");
    for e in &table.entries {
        println!(
            "{:<20} {:>16.10} {:>12.6} {:>6}",
            e.name,
            e.value,
            e.paper_value,
            if e.passes() { "yes" } else { "NO" }
        );
    }
    std::process::exit(if table.all_pass() { 0 } else { 1 });
}
