//! JSON records `{op, inputs, outputs, residuals}`.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub op: String,
    pub inputs: Value,
    pub outputs: Value,
    pub residuals: Value,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Internal(format!("serialisation failed: {e}")))
}

impl Record {
    pub fn new<I, O, R>(op: &str, inputs: &I, outputs: &O, residuals: &R) -> Result<Self>
    where
        I: Serialize,
        O: Serialize,
        R: Serialize,
    {
        Ok(Self {
            op: op.to_owned(),
            inputs: to_value(inputs)?,
            outputs: to_value(outputs)?,
            residuals: to_value(residuals)?,
        })
    }

    /// One line of compact JSON, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("values are already JSON")
    }
}
