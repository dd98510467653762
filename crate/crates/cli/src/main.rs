use leo_topo_cli::{parse_and_dispatch, Env};

fn main() {
    let code = parse_and_dispatch(
        std::env::args_os(),
        &Env::from_process(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
