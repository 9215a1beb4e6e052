use std::io::IsTerminal;

fn main() {
    let stdout = std::io::stdout();
    let is_terminal = stdout.is_terminal();
    let code = cannon_core::cli::run(std::env::args_os(), &mut stdout.lock(), &mut std::io::stderr(), is_terminal);
    std::process::exit(code);
}
