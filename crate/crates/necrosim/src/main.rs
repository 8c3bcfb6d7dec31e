fn main() {
    std::process::exit(necrosim::cli::run());
}
