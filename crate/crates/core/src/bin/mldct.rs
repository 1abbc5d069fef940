fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = {
        let mut out: Box<dyn std::io::Write> = Box::new(stdout.lock());
        let mut err: Box<dyn std::io::Write> = Box::new(stderr.lock());
        // `run` takes one writer type for both streams
        mldct::cli::run(std::env::args_os(), &mut out, &mut err)
    };
    std::process::exit(code);
}
