fn main() {
    std::process::exit(trace_lab::cli::main());
}
