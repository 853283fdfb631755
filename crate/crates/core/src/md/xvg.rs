//! Two-column curve files with `#` comments and `@` directives.

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(title: &str, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            points,
        }
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn render(&self, generator: &str) -> String {
        let mut out = format!(
            "# This file was created by {generator}\n\
             @    title \"{}\"\n\
             @    xaxis  label \"{}\"\n\
             @    yaxis  label \"{}\"\n\
             @TYPE xy\n",
            self.title, self.x_label, self.y_label
        );
        for (x, y) in &self.points {
            out.push_str(&format!("{x:>12.4} {y:>12.6}\n"));
        }
        out
    }

    /// Parses the first two numeric columns. Extra columns are ignored.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut curve = Curve::new("", "", "", Vec::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(directive) = line.strip_prefix('@') {
                let quoted = directive
                    .split_once('"')
                    .map(|(_, rest)| rest.trim_end_matches('"').to_string());
                let directive = directive.trim_start();
                if let Some(q) = quoted {
                    if directive.starts_with("title") {
                        curve.title = q;
                    } else if directive.starts_with("xaxis") {
                        curve.x_label = q;
                    } else if directive.starts_with("yaxis") {
                        curve.y_label = q;
                    }
                }
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |v: Option<&str>| v.and_then(|s| s.parse::<f64>().ok());
            match (parse(cols.next()), parse(cols.next())) {
                (Some(x), Some(y)) => curve.points.push((x, y)),
                _ => return Err(format!("line {}: expected two numeric columns", i + 1)),
            }
        }
        if curve.points.is_empty() {
            return Err("curve has no data rows".to_string());
        }
        Ok(curve)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_multi_column() {
        let c = Curve::new("RMSD", "Time (ns)", "RMSD (nm)", vec![(0.0, 0.1), (0.002, 0.12)]);
        let back = Curve::parse(&c.render("test")).unwrap();
        assert_eq!(back.points, c.points);
        assert_eq!(back.y_label, "RMSD (nm)");
        let multi = Curve::parse("@ title \"Rg\"\n0 1.5 1.1 1.2 1.3\n1 1.6 1 1 1\n").unwrap();
        assert_eq!(multi.ys(), [1.5, 1.6]);
        assert!(Curve::parse("# only comments\n").is_err());
        assert!(Curve::parse("1 abc\n").is_err());
    }
}
