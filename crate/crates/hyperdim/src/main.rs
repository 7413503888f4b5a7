use std::io::Write;

fn main() {
    let exec = hyperdim::cli::execute(std::env::args_os());
    let _ = std::io::stdout().write_all(exec.stdout.as_bytes());
    let _ = std::io::stderr().write_all(exec.stderr.as_bytes());
    std::process::exit(exec.code);
}
