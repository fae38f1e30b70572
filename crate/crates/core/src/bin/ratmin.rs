fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RATMIN_LOG", "warn")).init();
    std::process::exit(ratmin::cli::run(std::env::args_os()));
}
