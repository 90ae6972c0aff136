pub mod gan_oracle;
pub mod oracle;
