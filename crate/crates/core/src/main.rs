use meetwalk::cli::{main_with, CAPACITY_ENV};

fn main() {
    let capacity = std::env::var(CAPACITY_ENV).ok();
    std::process::exit(main_with(std::env::args_os(), capacity.as_deref()));
}
