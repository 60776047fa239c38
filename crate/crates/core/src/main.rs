fn main() {
    std::process::exit(slowrate::expcli::main());
}
