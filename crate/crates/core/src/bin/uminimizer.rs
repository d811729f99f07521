fn main() {
    uminimizer::cli::main()
}
