//! CSV export of step logs and decoupling tables.

use std::io::Write;

use cablegrip_core::cable::DecouplingReport;
use cablegrip_core::tasks::StepLog;

pub const STEP_LOG_HEADER: [&str; 23] = [
    "step", "qw", "phi1", "phi2", "roll", "tx", "ty", "tz", "len_w1", "len_w2", "len_j1a",
    "len_j1b", "len_j2a", "len_j2b", "T1_w", "T2_w", "T1_j1", "T2_j1", "T1_j2", "T2_j2", "held",
    "min_clearance", "collision",
];

fn num(v: f64) -> String {
    if v.is_finite() {
        // avoid "-0.000000"
        let s = format!("{v:.6}");
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    } else if v > 0.0 {
        "inf".into()
    } else {
        "nan".into()
    }
}

pub fn write_step_log<W: Write>(log: &StepLog, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STEP_LOG_HEADER)?;
    for s in &log.steps {
        let c = &s.config;
        let t = c.carriage.translation;
        let mut row = vec![
            s.step.to_string(),
            num(c.wrist_yaw),
            num(c.jaw1),
            num(c.jaw2),
            num(c.roll),
            num(t.x),
            num(t.y),
            num(t.z),
        ];
        row.extend(s.lengths.iter().map(|v| num(*v)));
        row.extend(s.tensions.iter().map(|v| num(*v)));
        row.push(s.held.clone().unwrap_or_default());
        row.push(num(s.min_clearance));
        row.push(u8::from(s.collision).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_decoupling<W: Write>(report: &DecouplingReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["qw", "phi1", "phi2", "residual_j1", "residual_j2"])?;
    for s in &report.samples {
        w.write_record([
            num(s.wrist_yaw),
            num(s.jaw1),
            num(s.jaw2),
            format!("{:.3e}", s.residuals[0]),
            format!("{:.3e}", s.residuals[1]),
        ])?;
    }
    w.flush()?;
    Ok(())
}
