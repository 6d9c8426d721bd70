"""Shared configuration, error types and array helpers."""
