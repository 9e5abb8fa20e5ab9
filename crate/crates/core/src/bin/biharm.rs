use std::path::PathBuf;

fn main() {
    let out_dir = std::env::var_os(biharm::cli::OUT_DIR_ENV).map(PathBuf::from);
    let code = biharm::cli::main_with(
        std::env::args_os(),
        out_dir.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
