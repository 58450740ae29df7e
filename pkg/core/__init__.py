"""
Núcleo numérico do SwingROA: grafo, modelo, energia, certificado, dinâmica e varreduras.
"""
