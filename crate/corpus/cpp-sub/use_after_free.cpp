int main() {
  int *p = new int(4);
  delete p;
  int v = *p;
  return 0;
}
