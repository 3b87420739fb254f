//! In-process message bus. Every delivery is appended as a typed record;
//! records are checked against a per-kind field list before they are stored.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    PublicKey,
    DealerRecord,
    NonceCommitment,
    SessionAbort,
    PartialSignature,
    PartialVerdict,
    GroupSignature,
    SignatureVerdict,
    ConfirmationStatement,
    ConfirmationCommitment,
    ConfirmationResponse,
    ConfirmationOpening,
    ConfirmationReveal,
    ConfirmationVerdict,
}

impl MessageKind {
    pub fn fields(self) -> &'static [&'static str] {
        use MessageKind::*;
        match self {
            PublicKey => &["member", "public_key"],
            DealerRecord => &["dealer", "partial_key", "entries"],
            NonceCommitment => &["signer", "u", "v", "w"],
            SessionAbort => &["reason"],
            PartialSignature => &["session", "signer", "s", "v", "c", "r_s"],
            PartialVerdict => &["signer", "accepted"],
            GroupSignature => &["s_s", "u_s", "w_s", "message", "signers"],
            SignatureVerdict => &["accepted"],
            ConfirmationStatement => &["r_r", "e", "s_s", "u_s", "w_s", "message", "mu", "signers"],
            ConfirmationCommitment => &["w"],
            ConfirmationResponse => &["beta", "gamma"],
            ConfirmationOpening => &["u", "v"],
            ConfirmationReveal => &["alpha"],
            ConfirmationVerdict => &["accepted"],
        }
    }
}

/// Names that only ever label secret material. `alpha` is the exception
/// allowed in the final reveal, after the opening has been checked.
pub const SECRET_FIELD_NAMES: &[&str] = &[
    "secret_key",
    "x_s",
    "x_r",
    "receiver_secret",
    "polynomial",
    "f",
    "masks",
    "h",
    "l",
    "share",
    "shares",
    "common_secret",
    "k",
    "k1",
    "k2",
    "first",
    "second",
    "nonce",
    "alpha",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusRecord {
    pub step: u64,
    pub sender: String,
    pub receiver: String,
    pub kind: MessageKind,
    pub fields: Map<String, Value>,
}

fn schema_error(kind: MessageKind, reason: String) -> Error {
    Error::Format {
        field: format!("{kind:?}"),
        reason,
    }
}

fn walk_keys(value: &Value, kind: MessageKind, top: bool) -> Result<()> {
    match value {
        Value::Object(map) => {
            for (key, inner) in map {
                let allowed_alpha =
                    top && kind == MessageKind::ConfirmationReveal && key == "alpha";
                if SECRET_FIELD_NAMES.contains(&key.as_str()) && !allowed_alpha {
                    return Err(schema_error(kind, format!("secret field `{key}`")));
                }
                walk_keys(inner, kind, false)?;
            }
            Ok(())
        }
        Value::Array(items) => items.iter().try_for_each(|v| walk_keys(v, kind, false)),
        _ => Ok(()),
    }
}

/// Exact field set for the kind, and no secret names at any depth.
pub fn check_record(record: &BusRecord) -> Result<()> {
    let expected = record.kind.fields();
    let mut got: Vec<&str> = record.fields.keys().map(String::as_str).collect();
    got.sort_unstable();
    let mut want = expected.to_vec();
    want.sort_unstable();
    if got != want {
        return Err(schema_error(
            record.kind,
            format!("fields {got:?}, expected {want:?}"),
        ));
    }
    walk_keys(&Value::Object(record.fields.clone()), record.kind, true)
}

#[derive(Clone, Debug, Default)]
pub struct Bus {
    records: Vec<BusRecord>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send<T: Serialize>(
        &mut self,
        sender: &str,
        receiver: &str,
        kind: MessageKind,
        payload: &T,
    ) -> Result<()> {
        let value = serde_json::to_value(payload).map_err(|e| schema_error(kind, e.to_string()))?;
        let Value::Object(fields) = value else {
            return Err(schema_error(kind, "payload is not an object".into()));
        };
        let record = BusRecord {
            step: self.records.len() as u64,
            sender: sender.into(),
            receiver: receiver.into(),
            kind,
            fields,
        };
        check_record(&record)?;
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[BusRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<BusRecord> {
        self.records
    }
}

/// One JSON object per line.
pub fn to_jsonl(records: &[BusRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("bus records serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn accepts_declared_fields() {
        let mut bus = Bus::new();
        bus.send(
            "C",
            "R",
            MessageKind::ConfirmationCommitment,
            &json!({"w": "9"}),
        )
        .unwrap();
        bus.send(
            "R",
            "C",
            MessageKind::ConfirmationReveal,
            &json!({"alpha": "11"}),
        )
        .unwrap();
        assert_eq!(bus.records().len(), 2);
        assert_eq!(bus.records()[1].step, 1);
        let line = to_jsonl(bus.records());
        assert_eq!(line.lines().count(), 2);
        let back: BusRecord = serde_json::from_str(line.lines().next().unwrap()).unwrap();
        assert_eq!(&back, &bus.records()[0]);
    }

    #[test]
    fn rejects_secrets_and_stray_fields() {
        let mut bus = Bus::new();
        let err = bus.send(
            "R",
            "C",
            MessageKind::ConfirmationResponse,
            &json!({"beta": "1", "gamma": "1", "x_r": "7"}),
        );
        assert!(err.is_err());
        let err = bus.send(
            "R",
            "C",
            MessageKind::ConfirmationResponse,
            &json!({"beta": "1", "alpha": "3"}),
        );
        assert!(err.is_err());
        let nested = json!({"dealer": 1, "partial_key": "2", "entries": {"2": {"l": "4"}}});
        assert!(bus
            .send("S1", "ALL", MessageKind::DealerRecord, &nested)
            .is_err());
        assert!(bus
            .send("S1", "ALL", MessageKind::SessionAbort, &json!("text"))
            .is_err());
        assert!(bus.records().is_empty());
    }
}
