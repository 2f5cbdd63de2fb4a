use std::io::{stderr, stdout};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let code = fairex::cli::run(&args, &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}
