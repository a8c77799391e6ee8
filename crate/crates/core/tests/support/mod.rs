pub mod dense_oracle;
