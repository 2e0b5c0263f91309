use std::process::exit;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    exit(poset_ramsey::cli::run(&argv));
}
