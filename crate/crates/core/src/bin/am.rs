fn main() {
    std::process::exit(assignment_messages::cli::run(std::env::args_os()));
}
