//! The blocking term of an edge that follows a reflex vertex, closed form
//! against numerical integration, with the branch that produced it.

use std::f64::consts::PI;

use rangeshape::prob::{blocking_f, blocking_f_branch, blocking_f_numeric};

fn main() {
    let r_max = 100.0;
    println!(
        "{:>7} {:>7} {:>7} {:>12} {:>12}  branch",
        "lambda", "theta", "dxi", "closed", "numeric"
    );
    for &(lambda, theta, dxi) in &[
        (50.0, PI / 2.0, PI / 2.0),
        (200.0, PI / 2.0, PI / 4.0),
        (30.0, PI / 3.0, 0.3),
        (80.0, 2.5, 2.0),
        (150.0, 0.4, 1.2),
        (10.0, 2.9, 0.1),
    ] {
        let (f, branch) = blocking_f_branch(lambda, theta, dxi, r_max);
        assert_eq!(f, blocking_f(lambda, theta, dxi, r_max));
        let n = blocking_f_numeric(lambda, theta, dxi, r_max);
        println!("{lambda:7.1} {theta:7.3} {dxi:7.3} {f:12.6} {n:12.6}  {branch:?}");
    }
}
