use super::{DiffClass, DiffLine, Side};

const X_BACKGROUND: &str = "#FFD7D7";
const Y_BACKGROUND: &str = "#D7FFD7";

fn class_color(class: DiffClass) -> &'static str {
    match class {
        DiffClass::Common => "#0000CC",
        DiffClass::PartialOverlap => "#CC0000",
        DiffClass::UniqueX | DiffClass::UniqueY => "#007700",
        DiffClass::OutputConflict => "#770077",
    }
}

fn background(side: Side) -> &'static str {
    match side {
        Side::X => X_BACKGROUND,
        Side::Y => Y_BACKGROUND,
    }
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

const HEADER: &str = "<!DOCTYPE html>
<html>
<head>
<meta charset=\"utf-8\">
<title>Concordance comparison</title>
<style>
table { border-collapse: collapse; font-family: monospace; }
th, td { padding: 1px 6px; white-space: pre; }
td.left { text-align: right; }
</style>
</head>
<body>
<table>
<tr><th>#</th><th>Left context</th><th>Occurrence</th><th>Right context</th></tr>
";

const FOOTER: &str = "</table>
</body>
</html>
";

/// Renders diff lines as a self-contained HTML table.
///
/// Rows alternate between the two concordances; an empty row of the other
/// side is placed opposite every line that occurs in only one of them.
pub fn render_html(diff: &[DiffLine]) -> String {
    let mut out = String::from(HEADER);
    let mut row = 0;
    let mut push_row = |out: &mut String, side: Side, color: Option<&str>, cells: [&str; 3]| {
        row += 1;
        let style = match color {
            Some(c) => format!("background:{};color:{}", background(side), c),
            None => format!("background:{}", background(side)),
        };
        out.push_str(&format!(
            "<tr style=\"{style}\"><td>{row}</td><td class=\"left\">{}</td><td>{}</td><td>{}</td></tr>\n",
            escape_html(cells[0]),
            escape_html(cells[1]),
            escape_html(cells[2]),
        ));
    };
    for d in diff {
        let cells = [
            d.line.left.as_str(),
            d.line.matched.as_str(),
            d.line.right.as_str(),
        ];
        let color = Some(class_color(d.class));
        match d.class {
            DiffClass::UniqueX => {
                push_row(&mut out, Side::X, color, cells);
                push_row(&mut out, Side::Y, None, ["", "", ""]);
            }
            DiffClass::UniqueY => {
                push_row(&mut out, Side::X, None, ["", "", ""]);
                push_row(&mut out, Side::Y, color, cells);
            }
            _ => push_row(&mut out, d.side, color, cells),
        }
    }
    out.push_str(FOOTER);
    out
}
