//! GROMACS `.gro` coordinate files (nm).

#[derive(Debug, Clone, PartialEq)]
pub struct GroAtom {
    pub resnr: usize,
    pub resname: String,
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroFile {
    pub title: String,
    pub atoms: Vec<GroAtom>,
    pub box_nm: [f64; 3],
}

impl GroFile {
    pub fn render(&self) -> String {
        let mut out = format!("{}\n{:>5}\n", self.title, self.atoms.len());
        for (i, a) in self.atoms.iter().enumerate() {
            out.push_str(&format!(
                "{:>5}{:<5}{:>5}{:>5}{:>8.3}{:>8.3}{:>8.3}\n",
                a.resnr % 100_000,
                truncate(&a.resname, 5),
                truncate(&a.name, 5),
                (i + 1) % 100_000,
                a.x,
                a.y,
                a.z
            ));
        }
        out.push_str(&format!(
            "{:>10.5}{:>10.5}{:>10.5}\n",
            self.box_nm[0], self.box_nm[1], self.box_nm[2]
        ));
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let title = lines.next().ok_or("empty gro file")?.to_string();
        let count: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or("gro file has no atom count")?;
        let mut atoms = Vec::with_capacity(count);
        for i in 0..count {
            let line = lines
                .next()
                .ok_or_else(|| format!("gro file ends after {i} of {count} atoms"))?;
            let get = |s: usize, e: usize| line.get(s..e.min(line.len())).unwrap_or("").trim();
            let num = |s, e| -> Result<f64, String> {
                get(s, e)
                    .parse()
                    .map_err(|_| format!("bad coordinate on gro line {}", i + 3))
            };
            atoms.push(GroAtom {
                resnr: get(0, 5).parse().unwrap_or(0),
                resname: get(5, 10).to_string(),
                name: get(10, 15).to_string(),
                x: num(20, 28)?,
                y: num(28, 36)?,
                z: num(36, 44)?,
            });
        }
        let box_line = lines.next().ok_or("gro file has no box line")?;
        let dims: Vec<f64> = box_line
            .split_whitespace()
            .filter_map(|v| v.parse().ok())
            .collect();
        if dims.len() < 3 {
            return Err("gro box line needs three lengths".to_string());
        }
        Ok(Self {
            title,
            atoms,
            box_nm: [dims[0], dims[1], dims[2]],
        })
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let gro = GroFile {
            title: "test".into(),
            atoms: vec![
                GroAtom { resnr: 1, resname: "LYS".into(), name: "N".into(), x: 1.0, y: 2.0, z: 3.0 },
                GroAtom { resnr: 2, resname: "SOL".into(), name: "OW".into(), x: 0.5, y: 0.25, z: 0.125 },
            ],
            box_nm: [5.0, 5.0, 5.0],
        };
        let text = gro.render();
        let back = GroFile::parse(&text).unwrap();
        assert_eq!(back.atoms.len(), 2);
        assert_eq!(back.atoms[1].name, "OW");
        assert_eq!(back.box_nm, [5.0, 5.0, 5.0]);
        assert!(GroFile::parse("t\n3\n").is_err());
    }
}
