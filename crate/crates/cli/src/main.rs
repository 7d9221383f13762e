use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let code = fastmm_cli::dispatch(std::env::args().collect(), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
