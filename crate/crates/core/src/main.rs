fn main() {
    let outcome = spectra_cdma::cli::run(std::env::args_os());
    if let Some(message) = outcome.message {
        eprintln!("{message}");
    }
    std::process::exit(outcome.status);
}
