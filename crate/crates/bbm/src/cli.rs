//! placeholder while the library is built bottom-up
pub fn run() -> i32 {
    0
}
