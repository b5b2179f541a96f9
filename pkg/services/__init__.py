"""
Services layer - experiment orchestration, analysis, certificates and result files
"""
