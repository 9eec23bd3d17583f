fn main() {
    gocre::cli::init_threads();
    std::process::exit(gocre::cli::run(std::env::args_os()));
}
