"""
Interface de linha de comando do SwingROA.
"""
