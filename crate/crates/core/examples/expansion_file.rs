//! Writes an expansion as JSON, reads it back and checks that the exact
//! state survives the round trip.

use canard::cli::files::{ExpansionFile, ProblemFile};
use canard::expand;

const PROBLEM: &str = r#"{
    "p": 5, "L": 2, "t0": 2, "t1": 1,
    "S": [{"i": 3, "j": 1, "coeff": "1/2"}],
    "P": [{"a": 0, "b": 0, "coeff": 1}, {"a": 1, "b": 1, "coeff": -0.25}]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let file = ProblemFile::parse(PROBLEM)?;
    let spec = file.to_spec()?;
    let res = expand(&spec, 3)?;
    let json = ExpansionFile::from_result(&file, &res).to_json();
    println!("{json}");
    let back = ExpansionFile::parse(&json)?.to_result(&spec.table(3)?)?;
    println!("round trip exact: {}", back == res);
    Ok(())
}
