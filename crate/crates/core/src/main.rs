use std::io::IsTerminal;

fn main() {
    let stdin = std::io::stdin();
    let is_terminal = stdin.is_terminal();
    let code = logfield::cli::run(
        std::env::args(),
        std::env::var("LOGFIELD_BUDGET").ok().as_deref(),
        logfield::cli::Io {
            stdin: &mut stdin.lock(),
            stdin_is_terminal: is_terminal,
            out: &mut std::io::stdout().lock(),
            err: &mut std::io::stderr().lock(),
        },
    );
    std::process::exit(code);
}
