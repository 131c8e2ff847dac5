//! Privacy amplification placeholder: reconciled bits pass through unchanged.

/// Returns the reconciled key as is.
pub fn amplify(bits: &[u8]) -> Vec<u8> {
    log::info!("privacy amplification not implemented; passing {} bits through", bits.len());
    bits.to_vec()
}
