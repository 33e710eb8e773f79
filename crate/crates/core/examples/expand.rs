//! Order-K expansion of a canard problem: the α coefficients and the
//! u-terms order by order.

use canard::{expand, PMonomial, ProblemSpec, SMonomial};
use num_rational::BigRational;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let prob = ProblemSpec::new(
        3,
        2,
        2.0,
        1.0,
        vec![SMonomial { i: 3, j: 1, coeff: q(1, 1) }],
        vec![
            PMonomial { a: 0, b: 0, c: 0, d: 0, coeff: q(1, 1) },
            PMonomial { a: 1, b: 1, c: 0, d: 0, coeff: q(1, 2) },
        ],
    )?;
    let res = expand(&prob, 4)?;
    println!("fixed point after {} sweeps", res.iterations_used);
    for (n, a) in &res.alpha_series {
        println!("a_{n} = {a}  ~ {:.12}", a.to_f64());
    }
    for e in res.u_series.elements() {
        let slow: Vec<String> = e.slow.iter().map(|(i, c)| format!("({c}) t^{i}")).collect();
        let fast: Vec<String> = e.fast.iter().map(|((i, k), c)| format!("({c}) psibar_({i},{k})")).collect();
        println!("u_{}: {}", e.n, [slow, fast].concat().join(" + "));
    }
    Ok(())
}
