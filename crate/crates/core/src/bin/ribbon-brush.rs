use std::io;

fn main() {
    if std::env::args().nth(1).as_deref() == Some("serve") {
        tracing_subscriber::fmt().with_env_filter(tracing_subscriber::EnvFilter::from_default_env()).init();
    }
    let code = ribbon_brush::cli::run_from(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
