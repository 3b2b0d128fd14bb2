fn main() {
    if let Err(err) = shardstat_cli::run_main() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
