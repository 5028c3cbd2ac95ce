//! Self-contained gnuplot scripts: the data is inlined as named blocks.

use std::fmt::Write;

pub struct Curve<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Figure<'a> {
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub log_y: bool,
    pub curves: Vec<Curve<'a>>,
}

impl Figure<'_> {
    pub fn script(&self, png: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# gnuplot {png}.gp");
        let _ = writeln!(s, "set terminal pngcairo size 900,600");
        let _ = writeln!(s, "set output '{png}.png'");
        let _ = writeln!(s, "set title \"{}\"", self.title);
        let _ = writeln!(s, "set xlabel \"{}\"", self.xlabel);
        let _ = writeln!(s, "set ylabel \"{}\"", self.ylabel);
        let _ = writeln!(s, "set grid");
        if self.log_y {
            let _ = writeln!(s, "set logscale y");
        }
        for (i, c) in self.curves.iter().enumerate() {
            let _ = writeln!(s, "$d{i} << EOD");
            for (x, y) in c.x.iter().zip(c.y) {
                if !self.log_y || *y > 0.0 {
                    let _ = writeln!(s, "{x:.12e} {y:.12e}");
                }
            }
            let _ = writeln!(s, "EOD");
        }
        let parts: Vec<String> =
            self.curves.iter().enumerate().map(|(i, c)| format!("$d{i} using 1:2 with lines title \"{}\"", c.label)).collect();
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        s
    }
}
