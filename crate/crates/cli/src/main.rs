//! `anabench` binary.

fn main() {
    std::process::exit(anabench_cli::run(std::env::args_os()));
}
