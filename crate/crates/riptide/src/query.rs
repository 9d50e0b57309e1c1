use riptide_core::controls::ControlMap;
use riptide_core::expr::{compile, Diagnostic};
use riptide_core::pattern::Event;
use riptide_core::time::Span;

pub type Events = Vec<Event<ControlMap>>;

pub fn query(src: &str, span: &Span) -> Result<Events, Diagnostic> {
    Ok(compile(src)?.query(span))
}

/// The compact Event JSON array.
pub fn to_json(events: &Events) -> String {
    serde_json::to_string(events).expect("events always serialize")
}

pub fn to_table(events: &Events) -> String {
    let rows: Vec<[String; 3]> = events
        .iter()
        .map(|e| {
            let whole = e.whole.as_ref().map_or_else(|| "~".to_string(), |w| w.to_string());
            [whole, e.active.to_string(), e.value.to_string()]
        })
        .collect();
    let header = ["whole".to_string(), "active".to_string(), "controls".to_string()];
    let w0 = rows.iter().chain([&header]).map(|r| r[0].len()).max().unwrap_or(0);
    let w1 = rows.iter().chain([&header]).map(|r| r[1].len()).max().unwrap_or(0);
    let mut out = String::new();
    for [whole, active, controls] in [&header].into_iter().chain(&rows) {
        out.push_str(&format!("{whole:<w0$}  {active:<w1$}  {controls}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_aligned() {
        let events = query(r#"s "bd sn""#, &Span::new(0, 1)).unwrap();
        let table = to_table(&events);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        let col = lines[0].find("active").unwrap();
        assert!(lines[1..].iter().all(|l| l[col - 2..col].trim().is_empty()));
        assert!(lines[2].ends_with("{sound: sn}"));
    }

    #[test]
    fn json_is_compact() {
        let events = query(r#"s "bd""#, &Span::new(0, 1)).unwrap();
        assert_eq!(
            to_json(&events),
            r#"[{"whole":{"begin":"0/1","end":"1/1"},"active":{"begin":"0/1","end":"1/1"},"value":{"sound":"bd"}}]"#
        );
    }
}
