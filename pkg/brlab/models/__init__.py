"""Report schemas and sampled-field types"""
