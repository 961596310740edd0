"""
foresight-forge

Dataset construction and evaluation toolkit for trajectory-interleaved
vision-language conversations: annotation ingestion, clip sampling, the
trajectory text grammar, conversation building and benchmark scoring.
"""
__VERSION__ = "0.1.0"
