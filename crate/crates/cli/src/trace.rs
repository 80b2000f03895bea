//! Per-radius CSV rows. Vectors are packed with `;` between entries, an
//! absent witness is an empty cell, an infinite quotient is `inf`.

use std::io::Write;

use lipcalm::ModulusEstimate;

pub const HEADER: [&str; 4] = ["radius", "worst_quotient", "witness_param_packed", "witness_x"];

fn pack(v: &Option<Vec<f64>>) -> String {
    v.as_ref().map_or(String::new(), |v| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";"))
}

pub fn write<W: Write>(w: &mut csv::Writer<W>, est: &ModulusEstimate) -> csv::Result<()> {
    w.write_record(HEADER)?;
    for l in &est.per_radius {
        let q = l.worst_quotient.finite().map_or("inf".to_string(), |q| q.to_string());
        w.write_record([l.radius.to_string(), q, pack(&l.witness_param), pack(&l.witness_x)])?;
    }
    Ok(())
}
