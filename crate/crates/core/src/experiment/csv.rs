/// Significant digits written for every value.
const SIGNIFICANT_DIGITS: i32 = 12;
/// Values smaller than `1e-30` print as zero.
const MAX_DECIMALS: i32 = 30;

/// Decimal (never exponent) notation rounded to 12 significant digits,
/// trailing zeros dropped.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT_DIGITS - 1 - exponent).clamp(0, MAX_DECIMALS) as usize;
    let mut s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    match s.as_str() {
        "-0" => "0".into(),
        _ => s,
    }
}

/// Header plus numeric rows, rendered as comma-separated text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}
