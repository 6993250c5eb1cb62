use std::process;

fn main() {
    process::exit(fracvar::cli::run());
}
