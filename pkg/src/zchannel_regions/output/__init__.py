"""Result writers: CSV, JSON, SVG and run manifests."""
