use crate::table::csv_field;

/// One line of a probe report.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub dataset: String,
    pub method: String,
    pub instance_id: usize,
    /// Feature name, or `*` for probes that span all features.
    pub feature: String,
    pub verdict: String,
    pub epsilon: f64,
    pub ratio_sequence: Vec<f64>,
}

/// CSV with columns `dataset, method, instance_id, feature, verdict,
/// epsilon, ratio_sequence`; ratios are joined with `;`.
pub fn probe_csv(records: &[ProbeRecord]) -> String {
    let mut out = String::from("dataset,method,instance_id,feature,verdict,epsilon,ratio_sequence\n");
    for r in records {
        let ratios = r
            .ratio_sequence
            .iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{:e},{}\n",
            csv_field(&r.dataset),
            csv_field(&r.method),
            r.instance_id,
            csv_field(&r.feature),
            r.verdict,
            r.epsilon,
            ratios
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_quoting() {
        let csv = probe_csv(&[ProbeRecord {
            dataset: "wdbc".into(),
            method: "grad".into(),
            instance_id: 3,
            feature: "a, b".into(),
            verdict: "PASS".into(),
            epsilon: 0.5,
            ratio_sequence: vec![0.25, 0.125],
        }]);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, "wdbc,grad,3,\"a, b\",PASS,5e-1,2.5e-1;1.25e-1");
    }
}
