use clap::Parser;
use csvscout::cli::{run, Cli};

fn main() {
    // Die quietly on SIGPIPE like other text tools instead of panicking
    // when a downstream pager closes the stream early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(run(Cli::parse()));
}
