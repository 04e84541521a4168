"""Config-driven experiment runner and report writer."""
