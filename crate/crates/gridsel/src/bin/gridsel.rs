use std::process::exit;

fn main() {
    exit(gridsel::cli::run(std::env::args_os()));
}
